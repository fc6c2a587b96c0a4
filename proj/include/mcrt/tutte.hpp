#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "mcrt/linear_solver.hpp"
#include "mcrt/mated_crt.hpp"
#include "mcrt/network.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

using Point = std::complex<double>;

struct TutteEmbedding {
  int root = -1;
  std::vector<Point> positions;
  /// Boundary vertices in increasing index order.
  std::vector<int> boundary_order;
  /// Probability that the walk from the root first hits each boundary vertex.
  std::vector<double> hit_probability;
  /// Cumulative hit probabilities; the j-th boundary vertex sits at
  /// exp(2 pi i hitting_cdf[j]).
  std::vector<double> hitting_cdf;
  std::vector<std::uint8_t> is_boundary;
};

/// Root cell containing a uniform time in [0,1].
int pick_root(const MatedCrtMap& map, Rng& rng);

/// Harmonic measure of the boundary seen from `root`, by one linear solve.
/// Entries follow map.boundary_list().
std::vector<double> hitting_distribution(const MatedCrtMap& map, int root,
                                         const SolverOptions& opts = {});
std::vector<double> hitting_distribution(const Network& net, const std::vector<int>& boundary,
                                         int root, const SolverOptions& opts = {});

TutteEmbedding tutte_embed(const MatedCrtMap& map, int root, const SolverOptions& opts = {});
TutteEmbedding tutte_embed(const Network& net, const std::vector<int>& boundary, int root,
                           const SolverOptions& opts = {});

/// Largest deviation of an interior position from the conductance-weighted
/// mean of its neighbours.
double harmonicity_residual(const TutteEmbedding& emb, const Network& net);
double harmonicity_residual(const TutteEmbedding& emb, const MatedCrtMap& map);

void write_embedding_csv(std::ostream& os, const TutteEmbedding& emb);
void write_embedding_svg(std::ostream& os, const TutteEmbedding& emb, const MatedCrtMap& map,
                         int pixels = 800);

}  // namespace mcrt
