#include "mcrt/electrical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mcrt {

namespace {

std::vector<std::uint8_t> mask_of(const Network& net, const VertexSet& s) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(net.size()), 0);
  for (int v : s) {
    if (v < 0 || v >= net.size()) throw std::invalid_argument("vertex out of range");
    m[v] = 1;
  }
  return m;
}

VertexSet dedup(VertexSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

GreenTable green_function(const Network& net, const VertexSet& region, int source,
                          const SolverOptions& opts) {
  GreenTable t;
  t.region = dedup(region);
  t.source = source;
  t.Gr.assign(static_cast<std::size_t>(net.size()), 0.0);
  t.gr.assign(static_cast<std::size_t>(net.size()), 0.0);
  if (!std::binary_search(t.region.begin(), t.region.end(), source)) return t;

  KilledLaplacian lap(net, t.region, opts);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lap.size());
  rhs[lap.local(source)] = 1.0;
  const Eigen::VectorXd g = lap.solve(rhs);
  for (int i = 0; i < lap.size(); ++i) {
    const int y = lap.vertices()[i];
    t.gr[y] = std::max(0.0, g[i]);
    t.Gr[y] = net.degree(y) * t.gr[y];
  }
  return t;
}

double expected_exit_time(const Network& net, const VertexSet& region, int source,
                          const SolverOptions& opts) {
  const auto t = green_function(net, region, source, opts);
  return std::accumulate(t.Gr.begin(), t.Gr.end(), 0.0);
}

ExitMoment exit_moment_check(const Network& net, const VertexSet& region, int source, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("exit_moment_check: order must be 1..4");
  const VertexSet b = dedup(region);
  if (b.size() > 64) throw std::invalid_argument("exit_moment_check: region larger than 64");
  const int m = static_cast<int>(b.size());
  std::vector<int> local(static_cast<std::size_t>(net.size()), -1);
  for (int i = 0; i < m; ++i) local[b[i]] = i;
  if (source < 0 || source >= net.size() || local[source] < 0)
    throw std::invalid_argument("exit_moment_check: source outside region");

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (const auto& a : net.arcs(b[i]))
      if (local[a.to] >= 0) q(i, local[a.to]) += a.conductance / net.degree(b[i]);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  const auto lu = (id - q).fullPivLu();
  if (!lu.isInvertible()) throw std::invalid_argument("exit_moment_check: walk is never killed");

  // m_N = (I - Q)^{-1} [1 + sum_{j=1}^{N-1} C(N,j) Q m_j]
  std::vector<Eigen::VectorXd> moments{Eigen::VectorXd::Ones(m)};
  for (int n = 1; n <= order; ++n) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(m);
    double binom = 1;
    for (int j = 1; j < n; ++j) {
      binom = binom * (n - j + 1) / j;
      rhs += binom * (q * moments[j]);
    }
    moments.push_back(lu.solve(rhs));
  }

  const Eigen::MatrixXd green = lu.inverse();
  Eigen::VectorXd chain = Eigen::VectorXd::Ones(m);
  double factorial = 1;
  for (int n = 1; n <= order; ++n) {
    chain = green * chain;
    factorial *= n;
  }
  return {moments[order][local[source]], factorial * chain[local[source]]};
}

double effective_resistance(const Network& net, const VertexSet& A, const VertexSet& Z,
                            const SolverOptions& opts) {
  if (A.empty() || Z.empty()) throw std::invalid_argument("effective_resistance: empty set");
  const auto in_a = mask_of(net, A);
  const auto in_z = mask_of(net, Z);
  for (int v = 0; v < net.size(); ++v)
    if (in_a[v] && in_z[v]) throw std::invalid_argument("effective_resistance: A and Z intersect");

  // Glue A into vertex 0; other vertices keep their order.
  std::vector<int> relabel(static_cast<std::size_t>(net.size()), 0);
  int next = 1;
  for (int v = 0; v < net.size(); ++v)
    if (!in_a[v]) relabel[v] = next++;
  std::vector<WeightedEdge> edges;
  edges.reserve(net.edges().size());
  for (const auto& e : net.edges()) {
    const int u = relabel[e.u], v = relabel[e.v];
    if (u != v) edges.push_back({u, v, e.conductance});
  }
  const Network glued(next, std::move(edges));

  VertexSet free;
  bool reaches_z = false;
  for (int v = 0; v < net.size(); ++v) {
    const int g = relabel[v];
    if (glued.component(g) != glued.component(0)) continue;
    if (in_z[v]) reaches_z = true;
    else if (!in_a[v]) free.push_back(g);
  }
  if (!reaches_z) return std::numeric_limits<double>::infinity();
  free.insert(free.begin(), 0);
  KilledLaplacian lap(glued, free, opts);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lap.size());
  rhs[0] = 1.0;
  return lap.solve(rhs)[0];
}

double dirichlet_energy(const std::vector<double>& f, const Network& net) {
  if (static_cast<int>(f.size()) != net.size())
    throw std::invalid_argument("dirichlet_energy: function size mismatch");
  double e = 0;
  for (const auto& ed : net.edges()) {
    const double d = f[ed.u] - f[ed.v];
    e += ed.conductance * d * d;
  }
  return e;
}

Eigen::MatrixXd harmonic_extension(const Network& net, const VertexSet& boundary_vertices,
                                   const Eigen::MatrixXd& values, const SolverOptions& opts) {
  if (values.rows() != static_cast<Eigen::Index>(boundary_vertices.size()))
    throw std::invalid_argument("harmonic_extension: one value row per boundary vertex");
  const auto on_boundary = mask_of(net, boundary_vertices);
  std::vector<std::uint8_t> comp_has(static_cast<std::size_t>(net.num_components()), 0);
  for (int v : boundary_vertices) comp_has[net.component(v)] = 1;
  for (int v = 0; v < net.size(); ++v)
    if (!comp_has[net.component(v)])
      throw std::invalid_argument("harmonic_extension: a component has no boundary data");

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(net.size(), values.cols());
  for (std::size_t i = 0; i < boundary_vertices.size(); ++i)
    out.row(boundary_vertices[i]) = values.row(static_cast<Eigen::Index>(i));
  VertexSet free;
  for (int v = 0; v < net.size(); ++v)
    if (!on_boundary[v]) free.push_back(v);
  if (free.empty()) return out;

  KilledLaplacian lap(net, free, opts);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lap.size(), values.cols());
  for (int i = 0; i < lap.size(); ++i)
    for (const auto& a : net.arcs(free[i]))
      if (on_boundary[a.to]) rhs.row(i) += a.conductance * out.row(a.to);
  const Eigen::MatrixXd sol = lap.solve(rhs);
  for (int i = 0; i < lap.size(); ++i) out.row(free[i]) = sol.row(i);
  return out;
}

std::vector<double> harmonic_extension(const Network& net, const BoundaryData& boundary,
                                       const SolverOptions& opts) {
  VertexSet verts;
  Eigen::MatrixXd vals(static_cast<Eigen::Index>(boundary.size()), 1);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    verts.push_back(boundary[i].first);
    vals(static_cast<Eigen::Index>(i), 0) = boundary[i].second;
  }
  const Eigen::MatrixXd h = harmonic_extension(net, verts, vals, opts);
  return {h.col(0).data(), h.col(0).data() + h.rows()};
}

double UnitFlow::out_of(const Network& net, int v) const {
  double s = 0;
  for (const auto& a : net.arcs(v)) {
    const auto& e = net.edge(a.edge);
    s += e.u == v ? flow[a.edge] : -flow[a.edge];
  }
  return s;
}

double UnitFlow::energy(const Network& net) const {
  double e = 0;
  for (int id = 0; id < net.num_edges(); ++id) e += flow[id] * flow[id] / net.edge(id).conductance;
  return e;
}

double UnitFlow::across_cut(const Network& net, const std::vector<std::uint8_t>& inside) const {
  double s = 0;
  for (int id = 0; id < net.num_edges(); ++id) {
    const auto& e = net.edge(id);
    if (inside[e.u] && !inside[e.v]) s += flow[id];
    if (inside[e.v] && !inside[e.u]) s -= flow[id];
  }
  return s;
}

UnitFlow unit_current_flow(const Network& net, int source, const VertexSet& sinks,
                           const SolverOptions& opts) {
  const auto in_z = mask_of(net, sinks);
  if (source < 0 || source >= net.size() || in_z[source])
    throw std::invalid_argument("unit_current_flow: source must lie outside the sink set");
  VertexSet free;
  bool reaches = false;
  for (int v = 0; v < net.size(); ++v) {
    if (net.component(v) != net.component(source)) continue;
    if (in_z[v]) reaches = true;
    else free.push_back(v);
  }
  if (!reaches) throw std::invalid_argument("unit_current_flow: sinks unreachable from source");
  KilledLaplacian lap(net, free, opts);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lap.size());
  rhs[lap.local(source)] = 1.0;
  const Eigen::VectorXd g = lap.solve(rhs);
  auto volt = [&](int v) { return lap.local(v) >= 0 ? g[lap.local(v)] : 0.0; };

  UnitFlow f;
  f.source = source;
  f.sinks = sinks;
  f.flow.assign(static_cast<std::size_t>(net.num_edges()), 0.0);
  for (int id = 0; id < net.num_edges(); ++id) {
    const auto& e = net.edge(id);
    f.flow[id] = e.conductance * (volt(e.u) - volt(e.v));
  }
  const double out = f.out_of(net, source);
  for (double& x : f.flow) x /= out;
  return f;
}

VertexSet inner_boundary(const Network& net, const VertexSet& A) {
  const auto in_a = mask_of(net, A);
  VertexSet out;
  for (int v : dedup(A))
    for (const auto& a : net.arcs(v))
      if (!in_a[a.to]) {
        out.push_back(v);
        break;
      }
  return out;
}

SandwichRecord sandwich_check(const Network& net, const VertexSet& A, const VertexSet& B, int x,
                              const SolverOptions& opts) {
  const auto in_a = mask_of(net, A);
  const auto in_b = mask_of(net, B);
  for (int v : A)
    if (!in_b[v]) throw std::invalid_argument("sandwich_check: A must be contained in B");
  if (dedup(A).size() >= dedup(B).size())
    throw std::invalid_argument("sandwich_check: A must be a strict subset of B");
  if (x < 0 || x >= net.size() || !in_a[x]) throw std::invalid_argument("sandwich_check: x not in A");
  const VertexSet bdy = inner_boundary(net, A);
  if (bdy.empty()) throw std::invalid_argument("sandwich_check: empty boundary of A");

  const auto green = green_function(net, B, x, opts);
  SandwichRecord r;
  r.a = std::numeric_limits<double>::infinity();
  r.b = -std::numeric_limits<double>::infinity();
  for (int y : bdy) {
    r.a = std::min(r.a, green.gr[y]);
    r.b = std::max(r.b, green.gr[y]);
  }
  for (const auto& e : net.edges())
    if (in_b[e.u] && in_b[e.v]) r.delta = std::max(r.delta, std::abs(green.gr[e.u] - green.gr[e.v]));

  VertexSet outside;
  for (int v = 0; v < net.size(); ++v)
    if (!in_b[v]) outside.push_back(v);
  r.resistance = effective_resistance(net, A, outside, opts);
  r.lower = r.a > 0 ? r.a * r.a / (r.a + r.delta) : 0.0;
  r.upper = r.b + r.delta;
  constexpr double slack = 1e-10;
  r.pass = r.lower <= r.resistance * (1 + slack) && r.resistance <= r.upper * (1 + slack) &&
           r.delta <= 1.0 + slack;
  return r;
}

std::vector<int> wilson_ust(const Network& net, int root, Rng& rng) {
  if (net.num_components() != 1) throw std::invalid_argument("wilson_ust: network is disconnected");
  if (root < 0 || root >= net.size()) throw std::invalid_argument("wilson_ust: bad root");
  std::vector<std::uint8_t> in_tree(static_cast<std::size_t>(net.size()), 0);
  std::vector<int> next_edge(static_cast<std::size_t>(net.size()), -1);
  std::vector<int> next_vertex(static_cast<std::size_t>(net.size()), -1);
  in_tree[root] = 1;
  std::vector<int> tree;
  for (int s = 0; s < net.size(); ++s) {
    // Walk until the tree, overwriting exits: the surviving pointers form
    // the loop erasure of the walk.
    int v = s;
    while (!in_tree[v]) {
      const auto& arc = net.step_arc(v, rng);
      next_edge[v] = arc.edge;
      next_vertex[v] = arc.to;
      v = arc.to;
    }
    for (v = s; !in_tree[v]; v = next_vertex[v]) {
      in_tree[v] = 1;
      tree.push_back(next_edge[v]);
    }
  }
  return tree;
}

namespace {

std::vector<int> walk_to(const Network& net, const std::vector<std::uint8_t>& stop, int start,
                         Rng& rng) {
  std::vector<int> path{start};
  int v = start;
  while (!stop[v]) {
    v = net.step(v, rng);
    path.push_back(v);
  }
  return path;
}

std::vector<int> loop_erase_fast(const std::vector<int>& path, int n) {
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  std::vector<int> out;
  for (int v : path) {
    if (pos[v] >= 0) {
      for (std::size_t k = static_cast<std::size_t>(pos[v]) + 1; k < out.size(); ++k) pos[out[k]] = -1;
      out.resize(static_cast<std::size_t>(pos[v]) + 1);
    } else {
      pos[v] = static_cast<int>(out.size());
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

std::vector<int> loop_erase(const std::vector<int>& path) {
  if (path.empty()) return {};
  return loop_erase_fast(path, *std::max_element(path.begin(), path.end()) + 1);
}

CoupledExit coupled_exit(const Network& net, const VertexSet& target, int x, int y, Rng& rng) {
  const auto in_a = mask_of(net, target);
  if (target.empty()) throw std::invalid_argument("coupled_exit: empty target");
  for (int v : {x, y}) {
    if (v < 0 || v >= net.size()) throw std::invalid_argument("coupled_exit: bad start");
    bool hits = false;
    for (int a : target) hits |= net.component(a) == net.component(v);
    if (!hits) throw std::invalid_argument("coupled_exit: target unreachable");
  }
  const auto erased = loop_erase_fast(walk_to(net, in_a, y, rng), net.size());
  CoupledExit r;
  r.exit_y = erased.back();
  std::vector<std::uint8_t> stop = in_a;
  for (int v : erased) stop[v] = 1;
  int v = x;
  while (!stop[v]) v = net.step(v, rng);
  if (in_a[v]) {
    r.exit_x = v;
  } else {
    r.exit_x = r.exit_y;  // continues along the erased y-path
  }
  r.coupled = r.exit_x == r.exit_y;
  return r;
}

double disconnection_probability(const Network& net, const VertexSet& target, int x, int y,
                                 int runs, Rng& rng) {
  const auto in_a = mask_of(net, target);
  if (runs <= 0) throw std::invalid_argument("disconnection_probability: runs must be positive");
  int hits = 0;
  std::vector<std::uint8_t> trace(static_cast<std::size_t>(net.size()));
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(net.size()));
  std::vector<int> stack;
  for (int r = 0; r < runs; ++r) {
    std::fill(trace.begin(), trace.end(), 0);
    int v = x;
    while (!in_a[v]) {
      trace[v] = 1;
      v = net.step(v, rng);
    }
    bool disconnected = trace[y] != 0;
    if (!disconnected) {
      std::fill(seen.begin(), seen.end(), 0);
      stack.assign(1, y);
      seen[y] = 1;
      disconnected = true;
      while (!stack.empty() && disconnected) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& a : net.arcs(u)) {
          if (trace[a.to] || seen[a.to]) continue;
          if (in_a[a.to]) {
            disconnected = false;
            break;
          }
          seen[a.to] = 1;
          stack.push_back(a.to);
        }
      }
    }
    hits += disconnected;
  }
  return static_cast<double>(hits) / runs;
}

}  // namespace mcrt
