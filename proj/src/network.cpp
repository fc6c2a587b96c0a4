#include "mcrt/network.hpp"

#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mcrt {

Network::Network(int n, std::vector<WeightedEdge> edges) : n_(n) {
  if (n < 0) throw std::invalid_argument("Network: negative vertex count");
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
      throw std::invalid_argument("Network: edge endpoint out of range");
    if (!(e.conductance > 0)) throw std::invalid_argument("Network: conductances must be positive");
    if (e.u == e.v) continue;
    edges_.push_back(e);
    if (e.conductance != 1.0) unit_ = false;
  }
  offset_.assign(static_cast<std::size_t>(n) + 1, 0);
  degree_.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : edges_) {
    ++offset_[e.u + 1];
    ++offset_[e.v + 1];
    degree_[e.u] += e.conductance;
    degree_[e.v] += e.conductance;
  }
  std::partial_sum(offset_.begin(), offset_.end(), offset_.begin());
  arcs_.resize(static_cast<std::size_t>(offset_[n]));
  std::vector<int> fill(offset_.begin(), offset_.end() - 1);
  for (int id = 0; id < num_edges(); ++id) {
    const auto& e = edges_[id];
    arcs_[fill[e.u]++] = {e.v, id, e.conductance};
    arcs_[fill[e.v]++] = {e.u, id, e.conductance};
  }

  component_.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (component_[s] >= 0) continue;
    component_[s] = num_components_;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& a : arcs(v))
        if (component_[a.to] < 0) {
          component_[a.to] = num_components_;
          stack.push_back(a.to);
        }
    }
    ++num_components_;
  }
}

Network Network::from_map(const MatedCrtMap& map) {
  std::vector<WeightedEdge> edges;
  edges.reserve(map.edges.size());
  for (const auto& e : map.edges) edges.push_back({e.u, e.v, 1.0});
  return Network(map.n, std::move(edges));
}

const Network::Arc& Network::step_arc(int v, Rng& rng) const {
  const auto out = arcs(v);
  if (unit_) return out[rng.below(out.size())];
  double pick = rng.uniform() * degree_[v];
  for (const auto& a : out) {
    pick -= a.conductance;
    if (pick < 0) return a;
  }
  return out.back();
}

int Network::step(int v, Rng& rng) const {
  if (offset_[v + 1] == offset_[v]) return v;
  return step_arc(v, rng).to;
}

Network read_edge_list(std::istream& is) {
  int n = -1;
  std::vector<WeightedEdge> edges;
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string key;
      if (!(ls >> key >> n) || key != "n" || n < 0)
        throw std::runtime_error("edge list: expected 'n <count>'");
      continue;
    }
    WeightedEdge e{};
    if (!(ls >> e.u >> e.v)) throw std::runtime_error("edge list: bad line '" + line + "'");
    if (!(ls >> e.conductance)) e.conductance = 1.0;
    edges.push_back(e);
  }
  if (n < 0) throw std::runtime_error("edge list: expected 'n <count>'");
  return Network(n, std::move(edges));
}

void write_edge_list(std::ostream& os, const Network& net) {
  os << "n " << net.size() << '\n' << std::setprecision(17);
  for (const auto& e : net.edges()) os << e.u << ' ' << e.v << ' ' << e.conductance << '\n';
}

}  // namespace mcrt
