#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <vector>

#include "mcrt/network.hpp"
#include "mcrt/rng.hpp"

namespace oracle {

// Random connected multigraph: a random spanning tree plus extra edges, some
// of them parallel, with conductances in [0.5, 2] unless unit is set.
inline mcrt::Network random_network(int n, mcrt::Rng& rng, int extra, bool unit = false) {
  std::vector<mcrt::WeightedEdge> edges;
  auto c = [&] { return unit ? 1.0 : 0.5 + 1.5 * rng.uniform(); };
  for (int v = 1; v < n; ++v) edges.push_back({static_cast<int>(rng.below(v)), v, c()});
  for (int k = 0; k < extra && n > 1; ++k) {
    const int u = static_cast<int>(rng.below(n));
    int v = static_cast<int>(rng.below(n - 1));
    if (v >= u) ++v;
    edges.push_back({u, v, c()});
  }
  return mcrt::Network(n, edges);
}

// Transition matrix of the conductance-weighted walk.
inline Eigen::MatrixXd transition(const mcrt::Network& net) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(net.size(), net.size());
  for (const auto& e : net.edges()) {
    P(e.u, e.v) += e.conductance;
    P(e.v, e.u) += e.conductance;
  }
  for (int v = 0; v < net.size(); ++v)
    if (P.row(v).sum() > 0) P.row(v) /= P.row(v).sum();
  return P;
}

// Fundamental matrix (I - Q)^{-1} of the chain absorbed off `region`; rows
// and columns follow `region`.
inline Eigen::MatrixXd fundamental(const mcrt::Network& net, const std::vector<int>& region) {
  const Eigen::MatrixXd P = transition(net);
  const int k = static_cast<int>(region.size());
  Eigen::MatrixXd Q(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) Q(i, j) = P(region[i], region[j]);
  return (Eigen::MatrixXd::Identity(k, k) - Q).fullPivLu().inverse();
}

inline std::vector<int> random_subset(int n, mcrt::Rng& rng, int min_size, int max_size) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(all[i], all[rng.below(i + 1)]);
  const int size = min_size + static_cast<int>(rng.below(max_size - min_size + 1));
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace oracle
