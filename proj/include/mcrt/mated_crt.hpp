#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcrt/brownian_paths.hpp"

namespace mcrt {

enum class EdgeKind : std::uint8_t { Trivial, L, R };

char to_char(EdgeKind k);

struct Edge {
  int u;  // u < v
  int v;
  EdgeKind kind;

  int other(int x) const { return x == u ? v : u; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Mated-CRT map on vertices 0..n-1 (vertex i is cell i). Edges are stored
/// once; parallel L/R edges between the same pair are separate records.
/// The rotation system lists, for every vertex, its incident edge ids in
/// counterclockwise order.
struct MatedCrtMap {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<int> rot_offset;  // size n + 1
  std::vector<int> rot_edge;    // size 2 * #edges
  std::vector<std::uint8_t> boundary;  // empty unless a boundary is defined
  int root = -1;
  Topology topology = Topology::Plane;
  double gamma = 0;
  std::uint64_t seed = 0;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int degree(int x) const { return rot_offset[x + 1] - rot_offset[x]; }
  std::span<const int> rotation(int x) const {
    return {rot_edge.data() + rot_offset[x], static_cast<std::size_t>(degree(x))};
  }
  bool has_boundary() const { return !boundary.empty(); }
  bool is_boundary(int x) const { return has_boundary() && boundary[x] != 0; }
  std::vector<int> boundary_list() const;
};

class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Nontrivial (i, j) pairs with j > i + 1 and max(m_i, m_j) <= min of
/// m_k over i < k < j, found by one monotone-stack sweep.
std::vector<std::pair<int, int>> nontrivial_pairs(std::span<const double> m);

/// Builds edges and the rotation system from per-cell minima of L and R.
MatedCrtMap build_map(const CellMinima& mL, const CellMinima& mR);

/// Vertices i with m_i <= min_{k > i} m_k (the last vertex always qualifies).
std::vector<int> boundary_vertices(const CellMinima& mL);

/// (Re)computes the rotation system from the edge list.
void rotation_system(MatedCrtMap& map);

struct FaceSet {
  /// Each face is a cycle of directed edge ids (2e: u->v, 2e+1: v->u).
  std::vector<std::vector<int>> faces;
  int external = -1;
  int perimeter = 0;
};

inline int dir_tail(const MatedCrtMap& m, int d) {
  const Edge& e = m.edges[d >> 1];
  return (d & 1) ? e.v : e.u;
}
inline int dir_head(const MatedCrtMap& m, int d) {
  const Edge& e = m.edges[d >> 1];
  return (d & 1) ? e.u : e.v;
}

FaceSet enumerate_faces(const MatedCrtMap& map);

/// Induced submap on vertices [a, b] (inclusive) relabelled to 0..b-a.
/// Boundary flags mark vertices with a parent-map neighbour outside [a, b].
MatedCrtMap interval_submap(const MatedCrtMap& map, int a, int b);

/// Full pipeline: sample minima, split shared-endpoint ties, build the map,
/// and for disks attach the boundary.
MatedCrtMap map_from_path(const CorrelatedPath& path);

void write_map(std::ostream& os, const MatedCrtMap& map, bool with_rotation = true);
MatedCrtMap read_map(std::istream& is);

}  // namespace mcrt
