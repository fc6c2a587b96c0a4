#include "mcrt/mated_crt.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace mcrt {

char to_char(EdgeKind k) {
  switch (k) {
    case EdgeKind::Trivial: return 'T';
    case EdgeKind::L: return 'L';
    case EdgeKind::R: return 'R';
  }
  return '?';
}

namespace {
EdgeKind kind_from_char(char c) {
  switch (c) {
    case 'T': return EdgeKind::Trivial;
    case 'L': return EdgeKind::L;
    case 'R': return EdgeKind::R;
  }
  throw std::runtime_error(std::string("map file: unknown edge kind '") + c + "'");
}
}  // namespace

std::vector<int> MatedCrtMap::boundary_list() const {
  std::vector<int> out;
  for (int x = 0; x < n; ++x)
    if (is_boundary(x)) out.push_back(x);
  return out;
}

std::vector<std::pair<int, int>> nontrivial_pairs(std::span<const double> m) {
  // The stack holds indices whose value is <= every later value seen so far,
  // so stack values are nondecreasing bottom to top. For a new index j, an
  // entry i is adjacent iff the entry directly above i (the minimum of the
  // interior (i, j)) is >= m_j: that is every entry with value >= m_j plus
  // the first entry below them. Entries equal to m_j stay on the stack.
  std::vector<std::pair<int, int>> out;
  std::vector<int> stack;
  const int n = static_cast<int>(m.size());
  for (int j = 0; j < n; ++j) {
    int k = static_cast<int>(stack.size()) - 1;
    while (k >= 0 && m[stack[k]] >= m[j]) {
      if (stack[k] < j - 1) out.emplace_back(stack[k], j);
      --k;
    }
    if (k >= 0 && k < static_cast<int>(stack.size()) - 1 && stack[k] < j - 1)
      out.emplace_back(stack[k], j);
    while (!stack.empty() && m[stack.back()] > m[j]) stack.pop_back();
    stack.push_back(j);
  }
  return out;
}

void rotation_system(MatedCrtMap& map) {
  const int n = map.n;
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const auto& e : map.edges) {
    if (e.u < 0 || e.v >= n || e.u >= e.v) throw StructuralError("rotation_system: bad edge");
    ++deg[e.u];
    ++deg[e.v];
  }
  map.rot_offset.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int x = 0; x < n; ++x) map.rot_offset[x + 1] = map.rot_offset[x] + deg[x];
  map.rot_edge.assign(static_cast<std::size_t>(map.rot_offset[n]), -1);
  std::vector<int> fill(map.rot_offset.begin(), map.rot_offset.end() - 1);
  for (int id = 0; id < map.num_edges(); ++id) {
    map.rot_edge[fill[map.edges[id].u]++] = id;
    map.rot_edge[fill[map.edges[id].v]++] = id;
  }

  // Counterclockwise at x: trivial to x-1; L-edges cyclically decreasing
  // from just below x (left endpoints descending, then right endpoints
  // descending); trivial to x+1; R-edges cyclically increasing from just
  // above x (right endpoints ascending, then left endpoints ascending).
  const long span = 2L * n + 2;
  std::vector<int> left, lside, right, rside;
  for (int x = 0; x < n; ++x) {
    left.clear(), lside.clear(), right.clear(), rside.clear();
    for (int i = map.rot_offset[x]; i < map.rot_offset[x + 1]; ++i) {
      const int id = map.rot_edge[i];
      const Edge& e = map.edges[id];
      const int y = e.other(x);
      switch (e.kind) {
        case EdgeKind::Trivial: (y < x ? left : right).push_back(id); break;
        case EdgeKind::L: lside.push_back(id); break;
        case EdgeKind::R: rside.push_back(id); break;
      }
    }
    auto offset = [&](int id) { return static_cast<long>(map.edges[id].other(x)) - x; };
    std::sort(lside.begin(), lside.end(), [&](int a, int b) {
      auto key = [&](int id) { long d = offset(id); return d < 0 ? d : d - span; };
      return key(a) > key(b);
    });
    std::sort(rside.begin(), rside.end(), [&](int a, int b) {
      auto key = [&](int id) { long d = offset(id); return d > 0 ? d : d + span; };
      return key(a) < key(b);
    });
    int* out = map.rot_edge.data() + map.rot_offset[x];
    for (auto* part : {&left, &lside, &right, &rside})
      for (int id : *part) *out++ = id;
  }
}

MatedCrtMap build_map(const CellMinima& mL, const CellMinima& mR) {
  if (mL.size() != mR.size()) throw std::invalid_argument("build_map: minima length mismatch");
  if (mL.size() == 0) throw std::invalid_argument("build_map: empty minima");
  MatedCrtMap map;
  map.n = static_cast<int>(mL.size());
  for (int i = 0; i + 1 < map.n; ++i) map.edges.push_back({i, i + 1, EdgeKind::Trivial});
  for (auto [i, j] : nontrivial_pairs(mL.values)) map.edges.push_back({i, j, EdgeKind::L});
  for (auto [i, j] : nontrivial_pairs(mR.values)) map.edges.push_back({i, j, EdgeKind::R});
  rotation_system(map);
  return map;
}

std::vector<int> boundary_vertices(const CellMinima& mL) {
  std::vector<int> out;
  double suffix = std::numeric_limits<double>::infinity();
  for (int i = static_cast<int>(mL.size()) - 1; i >= 0; --i) {
    if (mL.values[i] <= suffix) out.push_back(i);
    suffix = std::min(suffix, mL.values[i]);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

FaceSet enumerate_faces(const MatedCrtMap& map) {
  const int nd = 2 * map.num_edges();
  // Position of each directed edge in the rotation of its tail.
  std::vector<int> pos(static_cast<std::size_t>(nd), -1);
  for (int x = 0; x < map.n; ++x) {
    const auto rot = map.rotation(x);
    for (int i = 0; i < static_cast<int>(rot.size()); ++i) {
      const int id = rot[i];
      const int d = map.edges[id].u == x ? 2 * id : 2 * id + 1;
      if (pos[d] != -1) throw StructuralError("enumerate_faces: edge listed twice at a vertex");
      pos[d] = i;
    }
  }
  if (std::find(pos.begin(), pos.end(), -1) != pos.end())
    throw StructuralError("enumerate_faces: rotation misses an edge");

  FaceSet fs;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(nd), 0);
  for (int start = 0; start < nd; ++start) {
    if (seen[start]) continue;
    std::vector<int> face;
    int d = start;
    do {
      if (seen[d]) throw StructuralError("enumerate_faces: orbit revisits a directed edge");
      seen[d] = 1;
      face.push_back(d);
      const int b = dir_head(map, d);
      const auto rot = map.rotation(b);
      const int next_id = rot[(pos[d ^ 1] + 1) % rot.size()];
      d = map.edges[next_id].u == b ? 2 * next_id : 2 * next_id + 1;
    } while (d != start);
    fs.faces.push_back(std::move(face));
  }
  if (fs.faces.empty()) {
    fs.faces.emplace_back();  // edgeless map: one empty outer face
    fs.external = 0;
    fs.perimeter = 0;
    return fs;
  }
  // Faces are discovered in increasing order of their lowest directed id,
  // so the first face of maximal degree wins the tie-break.
  fs.external = 0;
  for (int f = 1; f < static_cast<int>(fs.faces.size()); ++f)
    if (fs.faces[f].size() > fs.faces[fs.external].size()) fs.external = f;
  fs.perimeter = static_cast<int>(fs.faces[fs.external].size());
  return fs;
}

MatedCrtMap interval_submap(const MatedCrtMap& map, int a, int b) {
  if (a < 0 || b >= map.n || a > b) throw std::invalid_argument("interval_submap: empty range");
  MatedCrtMap sub;
  sub.n = b - a + 1;
  sub.topology = map.topology;
  sub.gamma = map.gamma;
  sub.seed = map.seed;
  sub.root = (map.root >= a && map.root <= b) ? map.root - a : -1;
  sub.boundary.assign(static_cast<std::size_t>(sub.n), 0);
  std::vector<int> new_id(map.edges.size(), -1);
  for (int id = 0; id < map.num_edges(); ++id) {
    const Edge& e = map.edges[id];
    const bool in_u = e.u >= a && e.u <= b;
    const bool in_v = e.v >= a && e.v <= b;
    if (in_u && in_v) {
      new_id[id] = sub.num_edges();
      sub.edges.push_back({e.u - a, e.v - a, e.kind});
    } else if (in_u) {
      sub.boundary[e.u - a] = 1;
    } else if (in_v) {
      sub.boundary[e.v - a] = 1;
    }
  }
  if (sub.n == 1) sub.boundary[0] = 1;
  sub.rot_offset.assign(static_cast<std::size_t>(sub.n) + 1, 0);
  for (int x = a; x <= b; ++x) {
    int kept = 0;
    for (int id : map.rotation(x))
      if (new_id[id] >= 0) {
        sub.rot_edge.push_back(new_id[id]);
        ++kept;
      }
    sub.rot_offset[x - a + 1] = sub.rot_offset[x - a] + kept;
  }
  return sub;
}

MatedCrtMap map_from_path(const CorrelatedPath& path) {
  auto mL = cell_minima(path, Coord::L);
  auto mR = cell_minima(path, Coord::R);
  split_adjacent_ties(path.L, path.substeps, mL);
  split_adjacent_ties(path.R, path.substeps, mR);
  auto map = build_map(mL, mR);
  map.topology = path.topology;
  map.gamma = path.gamma;
  map.seed = path.seed;
  if (path.topology == Topology::Disk) {
    map.boundary.assign(static_cast<std::size_t>(map.n), 0);
    for (int x : boundary_vertices(mL)) map.boundary[x] = 1;
  }
  return map;
}

void write_map(std::ostream& os, const MatedCrtMap& map, bool with_rotation) {
  os << "mcrt-map 1\n"
     << "n " << map.n << '\n'
     << "topology " << to_string(map.topology) << '\n'
     << "root " << map.root << '\n'
     << "gamma " << std::setprecision(17) << map.gamma << '\n'
     << "seed " << map.seed << '\n'
     << "edges " << map.num_edges() << '\n';
  for (const auto& e : map.edges) os << e.u << ' ' << e.v << ' ' << to_char(e.kind) << '\n';
  if (map.has_boundary()) {
    const auto b = map.boundary_list();
    os << "boundary " << b.size() << '\n';
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? " " : "") << b[i];
    os << '\n';
  }
  if (with_rotation) {
    os << "rotation\n";
    for (int x = 0; x < map.n; ++x) {
      os << x << ':';
      for (int id : map.rotation(x)) os << ' ' << id;
      os << '\n';
    }
  }
}

namespace {
template <typename T>
T expect_key(std::istream& is, const std::string& key) {
  std::string k;
  T v{};
  if (!(is >> k) || k != key) throw std::runtime_error("map file: expected '" + key + "'");
  if (!(is >> v)) throw std::runtime_error("map file: bad value for '" + key + "'");
  return v;
}
}  // namespace

MatedCrtMap read_map(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "mcrt-map" || version != 1)
    throw std::runtime_error("map file: bad header");
  MatedCrtMap map;
  map.n = expect_key<int>(is, "n");
  map.topology = topology_from_string(expect_key<std::string>(is, "topology"));
  map.root = expect_key<int>(is, "root");
  map.gamma = expect_key<double>(is, "gamma");
  map.seed = expect_key<std::uint64_t>(is, "seed");
  const int ne = expect_key<int>(is, "edges");
  for (int i = 0; i < ne; ++i) {
    Edge e{};
    char kind = 0;
    if (!(is >> e.u >> e.v >> kind)) throw std::runtime_error("map file: truncated edge list");
    e.kind = kind_from_char(kind);
    map.edges.push_back(e);
  }
  bool have_rotation = false;
  std::string section;
  while (is >> section) {
    if (section == "boundary") {
      int count = 0;
      is >> count;
      map.boundary.assign(static_cast<std::size_t>(map.n), 0);
      for (int i = 0; i < count; ++i) {
        int x = -1;
        if (!(is >> x) || x < 0 || x >= map.n) throw std::runtime_error("map file: bad boundary");
        map.boundary[x] = 1;
      }
    } else if (section == "rotation") {
      map.rot_offset.assign(static_cast<std::size_t>(map.n) + 1, 0);
      map.rot_edge.clear();
      std::string line;
      std::getline(is, line);
      for (int x = 0; x < map.n; ++x) {
        if (!std::getline(is, line)) throw std::runtime_error("map file: truncated rotation");
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head != std::to_string(x) + ":") throw std::runtime_error("map file: bad rotation line");
        int id = 0, count = 0;
        while (ls >> id) {
          map.rot_edge.push_back(id);
          ++count;
        }
        map.rot_offset[x + 1] = map.rot_offset[x] + count;
      }
      have_rotation = true;
    } else {
      throw std::runtime_error("map file: unknown section '" + section + "'");
    }
  }
  if (!have_rotation) rotation_system(map);
  return map;
}

}  // namespace mcrt
