#include "mcrt/brownian_paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mcrt/rng.hpp"

namespace mcrt {

namespace {

constexpr std::uint64_t kPathStream = 0x5041544855ULL;

struct Increment {
  double dl;
  double dr;
};

class CorrelatedIncrements {
public:
  CorrelatedIncrements(double rho, double dt)
      : sd_(std::sqrt(dt)), rho_(rho), rho_c_(std::sqrt(1.0 - rho * rho)) {}

  Increment draw(Rng& rng) const {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {sd_ * z1, sd_ * (rho_ * z1 + rho_c_ * z2)};
  }

private:
  double sd_, rho_, rho_c_;
};

// Overwrites L,R on [a, b] with a bridge between the current values at a and
// b. Interior values go to (bl, br) scratch buffers; returns false if any
// interior point is negative.
bool propose_bridge(const std::vector<double>& L, const std::vector<double>& R, std::size_t a,
                    std::size_t b, const CorrelatedIncrements& inc, Rng& rng,
                    std::vector<double>& bl, std::vector<double>& br) {
  const std::size_t m = b - a;
  bl.assign(m + 1, 0.0);
  br.assign(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    const auto d = inc.draw(rng);
    bl[k] = bl[k - 1] + d.dl;
    br[k] = br[k - 1] + d.dr;
  }
  const double gap_l = bl[m] - (L[b] - L[a]);
  const double gap_r = br[m] - (R[b] - R[a]);
  bool feasible = true;
  for (std::size_t k = 0; k <= m; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(m);
    bl[k] = L[a] + bl[k] - frac * gap_l;
    br[k] = R[a] + br[k] - frac * gap_r;
    if (k > 0 && k < m && (bl[k] < 0.0 || br[k] < 0.0)) feasible = false;
  }
  bl[0] = L[a];
  br[0] = R[a];
  bl[m] = L[b];
  br[m] = R[b];
  return feasible;
}

CorrelatedPath empty_path(const PathParams& p) {
  CorrelatedPath path;
  path.gamma = p.gamma;
  path.dt = p.dt();
  path.n_cells = p.n_cells;
  path.substeps = p.substeps;
  path.seed = p.seed;
  path.topology = p.topology;
  path.L.assign(p.grid_size(), 0.0);
  path.R.assign(p.grid_size(), 0.0);
  return path;
}

}  // namespace

std::string to_string(Topology t) { return t == Topology::Plane ? "plane" : "disk"; }

Topology topology_from_string(const std::string& s) {
  if (s == "plane") return Topology::Plane;
  if (s == "disk") return Topology::Disk;
  throw std::invalid_argument("unknown topology '" + s + "'");
}

void PathParams::validate() const {
  if (!(gamma > 0.0 && gamma < 2.0)) throw std::invalid_argument("gamma must lie in (0,2)");
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (topology == Topology::Plane && !(cell_duration > 0.0))
    throw std::invalid_argument("cell_duration must be positive");
}

double PathParams::cell_length() const {
  return topology == Topology::Disk ? 1.0 / n_cells : cell_duration;
}

double correlation_of(double gamma) {
  if (!(gamma > 0.0 && gamma < 2.0)) throw std::invalid_argument("gamma must lie in (0,2)");
  return -std::cos(std::numbers::pi * gamma * gamma / 4.0);
}

CorrelatedPath sample_plane(const PathParams& params) {
  params.validate();
  if (params.topology != Topology::Plane)
    throw std::invalid_argument("sample_plane requires plane topology");
  auto path = empty_path(params);
  Rng rng(params.seed, kPathStream);
  const CorrelatedIncrements inc(correlation_of(params.gamma), path.dt);
  for (std::size_t i = 1; i < path.L.size(); ++i) {
    const auto d = inc.draw(rng);
    path.L[i] = path.L[i - 1] + d.dl;
    path.R[i] = path.R[i - 1] + d.dr;
  }
  return path;
}

CorrelatedPath sample_disk_excursion(const PathParams& params, DiskMethod method,
                                     const DiskOptions& options) {
  params.validate();
  if (params.topology != Topology::Disk)
    throw std::invalid_argument("sample_disk_excursion requires disk topology");
  auto path = empty_path(params);
  const std::size_t n = path.L.size() - 1;
  Rng rng(params.seed, kPathStream);
  const CorrelatedIncrements inc(correlation_of(params.gamma), path.dt);
  path.L[n] = 1.0;
  path.R[n] = 0.0;
  std::vector<double> bl, br;

  if (method == DiskMethod::Rejection) {
    for (std::uint64_t attempt = 1; attempt <= options.max_attempts; ++attempt) {
      if (propose_bridge(path.L, path.R, 0, n, inc, rng, bl, br)) {
        path.L = bl;
        path.R = br;
        path.diagnostics.attempts = attempt;
        path.diagnostics.proposals = attempt;
        path.diagnostics.accepted = 1;
        return path;
      }
    }
    std::ostringstream msg;
    msg << "rejection sampler exhausted " << options.max_attempts << " attempts";
    throw SamplingFailure(msg.str(), options.max_attempts);
  }

  // Feasible seed path: L = t + c*sqrt(t(1-t)), R = c*sqrt(t(1-t)).
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    const double bump = 0.5 * std::sqrt(t * (1.0 - t));
    path.L[i] = t + bump;
    path.R[i] = bump;
  }
  path.L[n] = 1.0;
  path.R[n] = 0.0;
  if (n < 2) {
    path.diagnostics.attempts = 1;
    return path;
  }

  // Dyadic block lengths 2^u, u = 1..top, drawn with weight 2^{-u/2}.
  const int top = std::bit_width(n) - 1;
  std::vector<double> cdf(static_cast<std::size_t>(top));
  double acc = 0;
  for (int u = 1; u <= top; ++u) {
    acc += std::exp2(-0.5 * u);
    cdf[static_cast<std::size_t>(u - 1)] = acc;
  }
  const std::uint64_t moves =
      options.sweeps ? options.sweeps : 50ULL * static_cast<std::uint64_t>(params.n_cells);
  for (std::uint64_t mv = 0; mv < moves; ++mv) {
    const double pick = rng.uniform() * acc;
    const auto u = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin()) + 1;
    const std::size_t len = std::min<std::size_t>(std::size_t{1} << std::min(u, top), n);
    const std::size_t a = rng.below(n - len + 1);
    ++path.diagnostics.proposals;
    if (propose_bridge(path.L, path.R, a, a + len, inc, rng, bl, br)) {
      std::copy(bl.begin(), bl.end(), path.L.begin() + static_cast<std::ptrdiff_t>(a));
      std::copy(br.begin(), br.end(), path.R.begin() + static_cast<std::ptrdiff_t>(a));
      ++path.diagnostics.accepted;
    }
  }
  path.diagnostics.attempts = 1;
  return path;
}

CellMinima cell_minima(const std::vector<double>& values, int n_cells, int substeps, Coord coord) {
  if (n_cells < 1 || substeps < 1 ||
      values.size() != static_cast<std::size_t>(n_cells) * substeps + 1)
    throw std::invalid_argument("cell_minima: path length must equal n_cells * K + 1");
  CellMinima out;
  out.coord = coord;
  out.values.resize(static_cast<std::size_t>(n_cells));
  const auto k = static_cast<std::size_t>(substeps);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(i * k);
    out.values[i] = *std::min_element(first, first + static_cast<std::ptrdiff_t>(k + 1));
  }
  return out;
}

CellMinima cell_minima(const CorrelatedPath& path, Coord coord) {
  return cell_minima(path.coord(coord), path.n_cells, path.substeps, coord);
}

int split_adjacent_ties(const std::vector<double>& values, int substeps, CellMinima& minima) {
  auto& m = minima.values;
  const auto k = static_cast<std::size_t>(substeps);
  if (values.size() != m.size() * k + 1)
    throw std::invalid_argument("split_adjacent_ties: path/minima size mismatch");
  int split = 0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    if (m[i] != m[i + 1]) continue;
    const std::size_t shared = (i + 1) * k;
    const double left = values[shared - 1];
    const double right = values[shared + 1];
    double& lowered = left < right ? m[i] : m[i + 1];
    lowered = std::nextafter(lowered, -std::numeric_limits<double>::infinity());
    ++split;
  }
  return split;
}

namespace {
constexpr const char* kPathMagic = "MCRT-PATH";

void write_doubles(std::ostream& os, const std::vector<double>& xs) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  os.write(reinterpret_cast<const char*>(xs.data()),
           static_cast<std::streamsize>(xs.size() * sizeof(double)));
}

template <typename T>
T header_value(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("path file: truncated header");
  std::istringstream ls(line);
  std::string k;
  T v{};
  if (!(ls >> k >> v) || k != key) throw std::runtime_error("path file: expected key '" + key + "'");
  return v;
}
}  // namespace

void write_path_binary(std::ostream& os, const CorrelatedPath& path) {
  os << kPathMagic << '\n'
     << "version 1\n"
     << "gamma " << std::setprecision(17) << path.gamma << '\n'
     << "dt " << path.dt << '\n'
     << "n_cells " << path.n_cells << '\n'
     << "K " << path.substeps << '\n'
     << "topology " << to_string(path.topology) << '\n'
     << "seed " << path.seed << '\n';
  write_doubles(os, path.L);
  write_doubles(os, path.R);
}

CorrelatedPath read_path_binary(std::istream& is) {
  std::string magic;
  std::getline(is, magic);
  if (magic != kPathMagic) throw std::runtime_error("path file: bad magic");
  if (header_value<int>(is, "version") != 1) throw std::runtime_error("path file: bad version");
  CorrelatedPath path;
  path.gamma = header_value<double>(is, "gamma");
  path.dt = header_value<double>(is, "dt");
  path.n_cells = header_value<int>(is, "n_cells");
  path.substeps = header_value<int>(is, "K");
  path.topology = topology_from_string(header_value<std::string>(is, "topology"));
  path.seed = header_value<std::uint64_t>(is, "seed");
  const std::size_t n = static_cast<std::size_t>(path.n_cells) * path.substeps + 1;
  path.L.resize(n);
  path.R.resize(n);
  is.read(reinterpret_cast<char*>(path.L.data()), static_cast<std::streamsize>(n * sizeof(double)));
  is.read(reinterpret_cast<char*>(path.R.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("path file: truncated data");
  return path;
}

void write_path_csv(std::ostream& os, const CorrelatedPath& path) {
  os << "t,L,R\n" << std::setprecision(17);
  for (std::size_t i = 0; i < path.L.size(); ++i)
    os << static_cast<double>(i) * path.dt << ',' << path.L[i] << ',' << path.R[i] << '\n';
}

}  // namespace mcrt
