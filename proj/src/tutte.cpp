#include "mcrt/tutte.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "mcrt/electrical.hpp"

namespace mcrt {

int pick_root(const MatedCrtMap& map, Rng& rng) {
  if (map.n < 1) throw std::invalid_argument("pick_root: empty map");
  const auto v = static_cast<int>(std::floor(rng.uniform() * map.n));
  return std::min(v, map.n - 1);
}

std::vector<double> hitting_distribution(const Network& net, const std::vector<int>& boundary,
                                         int root, const SolverOptions& opts) {
  if (boundary.empty()) throw std::invalid_argument("hitting_distribution: no boundary");
  if (root < 0 || root >= net.size()) throw std::invalid_argument("hitting_distribution: bad root");
  std::vector<int> slot(static_cast<std::size_t>(net.size()), -1);
  for (std::size_t j = 0; j < boundary.size(); ++j) slot[boundary[j]] = static_cast<int>(j);
  std::vector<double> hit(boundary.size(), 0.0);
  if (slot[root] >= 0) {
    hit[static_cast<std::size_t>(slot[root])] = 1.0;
    return hit;
  }
  std::vector<int> interior;
  for (int v = 0; v < net.size(); ++v)
    if (slot[v] < 0 && net.component(v) == net.component(root)) interior.push_back(v);
  KilledLaplacian lap(net, interior, opts);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lap.size());
  rhs[lap.local(root)] = 1.0;
  // g = gr(root, .); the walk enters boundary vertex b from y at rate c(y,b).
  const Eigen::VectorXd g = lap.solve(rhs);
  for (int i = 0; i < lap.size(); ++i)
    for (const auto& a : net.arcs(interior[i]))
      if (slot[a.to] >= 0) hit[static_cast<std::size_t>(slot[a.to])] += g[i] * a.conductance;
  return hit;
}

std::vector<double> hitting_distribution(const MatedCrtMap& map, int root,
                                         const SolverOptions& opts) {
  return hitting_distribution(Network::from_map(map), map.boundary_list(), root, opts);
}

TutteEmbedding tutte_embed(const Network& net, const std::vector<int>& boundary, int root,
                           const SolverOptions& opts) {
  TutteEmbedding emb;
  emb.root = root;
  emb.boundary_order = boundary;
  emb.hit_probability = hitting_distribution(net, boundary, root, opts);
  emb.hitting_cdf.resize(boundary.size());
  double acc = 0;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(boundary.size()), 2);
  for (std::size_t j = 0; j < boundary.size(); ++j) {
    acc += emb.hit_probability[j];
    emb.hitting_cdf[j] = acc;
    const double angle = 2.0 * std::numbers::pi * acc;
    values(static_cast<Eigen::Index>(j), 0) = std::cos(angle);
    values(static_cast<Eigen::Index>(j), 1) = std::sin(angle);
  }
  const Eigen::MatrixXd pos = harmonic_extension(net, boundary, values, opts);
  emb.positions.resize(static_cast<std::size_t>(net.size()));
  for (int v = 0; v < net.size(); ++v) emb.positions[v] = {pos(v, 0), pos(v, 1)};
  emb.is_boundary.assign(static_cast<std::size_t>(net.size()), 0);
  for (int b : boundary) emb.is_boundary[b] = 1;
  return emb;
}

TutteEmbedding tutte_embed(const MatedCrtMap& map, int root, const SolverOptions& opts) {
  if (!map.has_boundary()) throw std::invalid_argument("tutte_embed: map has no boundary");
  return tutte_embed(Network::from_map(map), map.boundary_list(), root, opts);
}

double harmonicity_residual(const TutteEmbedding& emb, const Network& net) {
  double worst = 0;
  for (int v = 0; v < net.size(); ++v) {
    if (emb.is_boundary[v] || net.degree(v) == 0) continue;
    Point mean = 0;
    for (const auto& a : net.arcs(v)) mean += a.conductance * emb.positions[a.to];
    mean /= net.degree(v);
    worst = std::max(worst, std::abs(emb.positions[v] - mean));
  }
  return worst;
}

double harmonicity_residual(const TutteEmbedding& emb, const MatedCrtMap& map) {
  return harmonicity_residual(emb, Network::from_map(map));
}

void write_embedding_csv(std::ostream& os, const TutteEmbedding& emb) {
  os << "vertex,x,y,is_boundary\n" << std::setprecision(17);
  for (std::size_t v = 0; v < emb.positions.size(); ++v)
    os << v << ',' << emb.positions[v].real() << ',' << emb.positions[v].imag() << ','
       << static_cast<int>(emb.is_boundary[v]) << '\n';
}

void write_embedding_svg(std::ostream& os, const TutteEmbedding& emb, const MatedCrtMap& map,
                         int pixels) {
  const double half = pixels / 2.0;
  const double scale = 0.95 * half;
  auto px = [&](Point p) { return Point(half + scale * p.real(), half - scale * p.imag()); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\"" << pixels
     << "\" viewBox=\"0 0 " << pixels << ' ' << pixels << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<circle cx=\"" << half << "\" cy=\"" << half << "\" r=\"" << scale
     << "\" fill=\"none\" stroke=\"#bbb\"/>\n"
     << std::fixed << std::setprecision(2);
  for (const auto& e : map.edges) {
    const char* colour = e.kind == EdgeKind::Trivial ? "black" : e.kind == EdgeKind::L ? "red" : "blue";
    const Point a = px(emb.positions[e.u]), b = px(emb.positions[e.v]);
    os << "<line x1=\"" << a.real() << "\" y1=\"" << a.imag() << "\" x2=\"" << b.real()
       << "\" y2=\"" << b.imag() << "\" stroke=\"" << colour << "\" stroke-width=\"0.4\"/>\n";
  }
  for (std::size_t v = 0; v < emb.positions.size(); ++v) {
    const Point p = px(emb.positions[v]);
    const bool root = static_cast<int>(v) == emb.root;
    os << "<circle cx=\"" << p.real() << "\" cy=\"" << p.imag() << "\" r=\""
       << (root ? 4.0 : 1.2) << "\" fill=\"" << (root ? "green" : emb.is_boundary[v] ? "orange" : "black")
       << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace mcrt
