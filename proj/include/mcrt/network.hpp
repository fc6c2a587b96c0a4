#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mcrt/mated_crt.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

struct WeightedEdge {
  int u;
  int v;
  double conductance = 1.0;
};

/// Weighted multigraph viewed as an electrical network. Parallel edges are
/// kept as separate records; self-loops are dropped on construction.
class Network {
public:
  Network() = default;
  Network(int n, std::vector<WeightedEdge> edges);

  static Network from_map(const MatedCrtMap& map);

  int size() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const WeightedEdge& edge(int id) const { return edges_[id]; }

  /// Sum of incident conductances (edge count for unit conductances).
  double degree(int v) const { return degree_[v]; }

  struct Arc {
    int to;
    int edge;
    double conductance;
  };
  std::span<const Arc> arcs(int v) const {
    return {arcs_.data() + offset_[v], static_cast<std::size_t>(offset_[v + 1] - offset_[v])};
  }

  int component(int v) const { return component_[v]; }
  int num_components() const { return num_components_; }
  bool unit_conductances() const { return unit_; }

  /// One step of the conductance-weighted random walk; returns v if isolated.
  int step(int v, Rng& rng) const;
  /// Arc taken by one walk step from v (v must have an incident edge).
  const Arc& step_arc(int v, Rng& rng) const;

private:
  int n_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<int> offset_;
  std::vector<Arc> arcs_;
  std::vector<double> degree_;
  std::vector<int> component_;
  int num_components_ = 0;
  bool unit_ = true;
};

/// Generic edge-list format: first line "n <count>", then lines "i j conductance".
Network read_edge_list(std::istream& is);
void write_edge_list(std::ostream& os, const Network& net);

}  // namespace mcrt
