#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mcrt/linear_solver.hpp"
#include "mcrt/network.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

using VertexSet = std::vector<int>;

/// Green's function of the walk killed on leaving `region`, from `source`.
/// Both vectors span all vertices and vanish off the region.
struct GreenTable {
  VertexSet region;
  int source = -1;
  std::vector<double> Gr;  // expected visits
  std::vector<double> gr;  // Gr / deg
};

GreenTable green_function(const Network& net, const VertexSet& region, int source,
                          const SolverOptions& opts = {});

/// E[exit time from region] = sum_y Gr(source, y).
double expected_exit_time(const Network& net, const VertexSet& region, int source,
                          const SolverOptions& opts = {});

struct ExitMoment {
  double exact = 0;  // E[tau^N]
  double bound = 0;  // N! * sum over chains of Green's function products
};

/// Exact N-th exit-time moment by one-step recursion, against the Green's
/// function product bound. Requires N <= 4 and #region <= 64.
ExitMoment exit_moment_check(const Network& net, const VertexSet& region, int source, int order);

/// Effective resistance between disjoint sets A and Z (A glued to one
/// vertex). Returns +infinity when A and Z are disconnected.
double effective_resistance(const Network& net, const VertexSet& A, const VertexSet& Z,
                            const SolverOptions& opts = {});

/// Sum over edge records of c(e) (f(u) - f(v))^2.
double dirichlet_energy(const std::vector<double>& f, const Network& net);

using BoundaryData = std::vector<std::pair<int, double>>;

/// Unique function equal to the data on its support and discrete harmonic
/// (zero weighted Laplacian) everywhere else.
std::vector<double> harmonic_extension(const Network& net, const BoundaryData& boundary,
                                       const SolverOptions& opts = {});

/// Multi-column variant: one factorization shared by every column of
/// `values` (rows follow `boundary_vertices`). Returns an n x cols matrix.
Eigen::MatrixXd harmonic_extension(const Network& net, const VertexSet& boundary_vertices,
                                   const Eigen::MatrixXd& values, const SolverOptions& opts = {});

/// Antisymmetric edge function stored per edge record, oriented u -> v.
struct UnitFlow {
  int source = -1;
  VertexSet sinks;
  std::vector<double> flow;

  double out_of(const Network& net, int v) const;
  double energy(const Network& net) const;
  /// Net flow from `inside` (a vertex mask) to its complement.
  double across_cut(const Network& net, const std::vector<std::uint8_t>& inside) const;
};

UnitFlow unit_current_flow(const Network& net, int source, const VertexSet& sinks,
                           const SolverOptions& opts = {});

struct SandwichRecord {
  double a = 0, b = 0, delta = 0;
  double resistance = 0;
  double lower = 0, upper = 0;
  bool pass = false;
};

/// Checks a^2/(a+delta) <= R(A <-> V \ B) <= b + delta and delta <= 1.
SandwichRecord sandwich_check(const Network& net, const VertexSet& A, const VertexSet& B, int x,
                              const SolverOptions& opts = {});

/// Inner vertex boundary: members of A with a neighbour outside A.
VertexSet inner_boundary(const Network& net, const VertexSet& A);

/// Uniform spanning tree (conductance-weighted) by Wilson's algorithm.
/// Returns the edge ids of the tree.
std::vector<int> wilson_ust(const Network& net, int root, Rng& rng);

/// Chronological loop erasure of a vertex path.
std::vector<int> loop_erase(const std::vector<int>& path);

struct CoupledExit {
  int exit_x = -1;
  int exit_y = -1;
  bool coupled = false;
};

/// Wilson coupling of walks from x and y stopped on hitting `target`.
CoupledExit coupled_exit(const Network& net, const VertexSet& target, int x, int y, Rng& rng);

/// Monte Carlo probability that the walk from x, run until it hits `target`,
/// separates y from `target`.
double disconnection_probability(const Network& net, const VertexSet& target, int x, int y,
                                 int runs, Rng& rng);

}  // namespace mcrt
