#include "mcrt/field_lqg.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mcrt/rng.hpp"
#include "mcrt/stats.hpp"

namespace mcrt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kFieldStream = 0x474646ULL;

int wrap(int i, int M) {
  i %= M;
  return i < 0 ? i + M : i;
}

double sample_at(const GffGrid& f, int i, int j) {
  if (f.bc == FieldBc::TorusProjected) return f.at(wrap(i, f.M), wrap(j, f.M));
  if (i < 0 || j < 0 || i >= f.M || j >= f.M) return 0.0;
  return f.at(i, j);
}

void check_size(int M) {
  if (M < 8) throw std::invalid_argument("sample_gff: M must be at least 8");
}

void sample_zero_boundary(GffGrid& g, Rng& rng) {
  const int N = g.M - 2;
  std::vector<double> coeff(static_cast<std::size_t>(N) * N);
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < N; ++j) {
      const double lambda = 4.0 - 2.0 * std::cos(std::numbers::pi * (j + 1) / (N + 1)) -
                            2.0 * std::cos(std::numbers::pi * (k + 1) / (N + 1));
      coeff[static_cast<std::size_t>(k) * N + j] = rng.normal() * std::sqrt(kTwoPi / lambda);
    }
  std::vector<double> out(coeff.size());
  fftw_plan plan = fftw_plan_r2r_2d(N, N, coeff.data(), out.data(), FFTW_RODFT00, FFTW_RODFT00,
                                    FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  // Orthonormal sine basis is (2/(N+1)) sin sin; RODFT00 carries a factor 2
  // per dimension.
  const double scale = 2.0 / (N + 1) / 4.0;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) g.at(i + 1, j + 1) = scale * out[static_cast<std::size_t>(j) * N + i];
}

void sample_torus(GffGrid& g, Rng& rng) {
  const int M = g.M;
  const std::size_t size = static_cast<std::size_t>(M) * M;
  fftw_complex* buf = fftw_alloc_complex(size);
  for (int k = 0; k < M; ++k)
    for (int j = 0; j < M; ++j) {
      const std::size_t idx = static_cast<std::size_t>(k) * M + j;
      const double xi = rng.normal();
      const double eta = rng.normal();
      if (j == 0 && k == 0) {
        buf[idx][0] = buf[idx][1] = 0.0;
        continue;
      }
      const double lambda = 4.0 - 2.0 * std::cos(kTwoPi * j / M) - 2.0 * std::cos(kTwoPi * k / M);
      const double s = std::sqrt(kTwoPi / lambda) / M;
      buf[idx][0] = xi * s;
      buf[idx][1] = eta * s;
    }
  fftw_plan plan = fftw_plan_dft_2d(M, M, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  for (std::size_t idx = 0; idx < size; ++idx) g.values[idx] = buf[idx][0];
  fftw_free(buf);
  const double centre = circle_average(g, {0.0, 0.0}, 1.0);
  for (double& v : g.values) v -= centre;
}

// Offsets and weights for the bilinear circle average around a cell centre;
// the pattern is the same for every cell.
struct Stencil {
  std::vector<int> di, dj;
  std::vector<double> w;
};

Stencil ring_stencil(double a, double r) {
  const int n = static_cast<int>(std::ceil(kTwoPi * r / a));
  Stencil s;
  for (int k = 0; k < n; ++k) {
    const double th = kTwoPi * k / n;
    const double u = r * std::cos(th) / a;
    const double v = r * std::sin(th) / a;
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    const double fu = u - i0, fv = v - j0;
    const double w[4] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
    const int oi[4] = {0, 1, 0, 1}, oj[4] = {0, 0, 1, 1};
    for (int c = 0; c < 4; ++c) {
      s.di.push_back(i0 + oi[c]);
      s.dj.push_back(j0 + oj[c]);
      s.w.push_back(w[c] / n);
    }
  }
  return s;
}

void write_header_and_data(std::ostream& os, const std::string& header, const std::vector<double>& data) {
  os << header << "end\n";
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<std::pair<std::string, std::string>> read_header(std::istream& is, const char* magic) {
  std::string line;
  if (!std::getline(is, line) || line != magic)
    throw std::runtime_error(std::string("expected header ") + magic);
  std::vector<std::pair<std::string, std::string>> kv;
  while (std::getline(is, line) && line != "end") {
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    kv.emplace_back(k, v);
  }
  if (line != "end") throw std::runtime_error("truncated grid header");
  return kv;
}

std::vector<double> read_data(std::istream& is, std::size_t n) {
  std::vector<double> data(n);
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(is.gcount()) != n * sizeof(double))
    throw std::runtime_error("truncated grid data");
  return data;
}

}  // namespace

std::string to_string(FieldBc bc) { return bc == FieldBc::ZeroBoundary ? "zero" : "torus"; }

FieldBc field_bc_from_string(const std::string& s) {
  if (s == "zero" || s == "ZeroBoundary") return FieldBc::ZeroBoundary;
  if (s == "torus" || s == "TorusProjected") return FieldBc::TorusProjected;
  throw std::invalid_argument("unknown boundary condition: " + s);
}

GffGrid::GffGrid(int M_, FieldBc bc_)
    : M(M_), a(2.0 / M_), bc(bc_), values(static_cast<std::size_t>(M_) * M_, 0.0) {}

double GffGrid::interpolate(std::complex<double> z) const {
  const double u = (z.real() + 1.0) / a - 0.5;
  const double v = (z.imag() + 1.0) / a - 0.5;
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0, fv = v - j0;
  return (1 - fu) * (1 - fv) * sample_at(*this, i0, j0) + fu * (1 - fv) * sample_at(*this, i0 + 1, j0) +
         (1 - fu) * fv * sample_at(*this, i0, j0 + 1) + fu * fv * sample_at(*this, i0 + 1, j0 + 1);
}

GffGrid sample_gff(int M, FieldBc bc, std::uint64_t seed) {
  check_size(M);
  GffGrid g(M, bc);
  g.seed = seed;
  Rng rng(seed, kFieldStream);
  if (bc == FieldBc::ZeroBoundary)
    sample_zero_boundary(g, rng);
  else
    sample_torus(g, rng);
  return g;
}

GffGrid add_cone_singularity(const GffGrid& field, double gamma) {
  GffGrid out = field;
  const double floor_r = field.a / 2.0;
  for (int j = 0; j < field.M; ++j)
    for (int i = 0; i < field.M; ++i)
      out.at(i, j) += gamma * std::log(1.0 / std::max(std::abs(field.centre(i, j)), floor_r));
  out.cone_gamma += gamma;
  return out;
}

double circle_average(const GffGrid& field, std::complex<double> z, double r) {
  if (r < 2.0 * field.a * (1 - 1e-12)) throw std::invalid_argument("circle_average: r < 2a");
  const double slack = 1e-12;
  if (z.real() - r < -1 - slack || z.real() + r > 1 + slack || z.imag() - r < -1 - slack ||
      z.imag() + r > 1 + slack)
    throw std::invalid_argument("circle_average: circle leaves the grid");
  const int n = static_cast<int>(std::ceil(kTwoPi * r / field.a));
  double sum = 0;
  for (int k = 0; k < n; ++k) sum += field.interpolate(z + std::polar(r, kTwoPi * k / n));
  return sum / n;
}

double LqgMeasure::total() const {
  double s = 0;
  for (double m : mass) s += m;
  return s;
}

double LqgMeasure::ball_mass(std::complex<double> z, double r) const {
  const int ilo = std::max(0, static_cast<int>(std::floor((z.real() - r + 1) / a - 0.5)));
  const int ihi = std::min(M - 1, static_cast<int>(std::ceil((z.real() + r + 1) / a - 0.5)));
  const int jlo = std::max(0, static_cast<int>(std::floor((z.imag() - r + 1) / a - 0.5)));
  const int jhi = std::min(M - 1, static_cast<int>(std::ceil((z.imag() + r + 1) / a - 0.5)));
  double s = 0;
  for (int j = jlo; j <= jhi; ++j)
    for (int i = ilo; i <= ihi; ++i)
      if (std::norm(centre(i, j) - z) <= r * r) s += at(i, j);
  return s;
}

LqgMeasure build_lqg_measure(const GffGrid& field, double gamma, double eps_c) {
  if (eps_c <= 0) eps_c = 4.0 * field.a;
  if (eps_c < 2.0 * field.a * (1 - 1e-12)) throw std::invalid_argument("build_lqg_measure: eps_c < 2a");
  LqgMeasure mu;
  mu.M = field.M;
  mu.a = field.a;
  mu.gamma = gamma;
  mu.eps_c = eps_c;
  mu.seed = field.seed;
  mu.mass.resize(field.values.size());
  const Stencil s = ring_stencil(field.a, eps_c);
  const double prefactor = field.a * field.a * std::pow(eps_c, gamma * gamma / 2.0);
  for (int j = 0; j < field.M; ++j)
    for (int i = 0; i < field.M; ++i) {
      double avg = 0;
      for (std::size_t k = 0; k < s.w.size(); ++k) avg += s.w[k] * sample_at(field, i + s.di[k], j + s.dj[k]);
      mu.mass[static_cast<std::size_t>(j) * field.M + i] = prefactor * std::exp(gamma * avg);
    }
  return mu;
}

LqgMeasure lebesgue_measure(int M) {
  LqgMeasure mu;
  mu.M = M;
  mu.a = 2.0 / M;
  mu.mass.assign(static_cast<std::size_t>(M) * M, mu.a * mu.a);
  return mu;
}

BallMassScan ball_mass_scan(const LqgMeasure& measure, const std::vector<std::complex<double>>& centres,
                            const std::vector<double>& deltas) {
  if (centres.empty() || deltas.empty()) throw std::invalid_argument("ball_mass_scan: empty input");
  BallMassScan scan;
  scan.deltas = deltas;
  std::vector<double> ld, lmin, lmax;
  for (double d : deltas) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (auto z : centres) {
      const double m = measure.ball_mass(z, d);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    scan.min_mass.push_back(lo);
    scan.max_mass.push_back(hi);
    if (lo > 0) {
      ld.push_back(std::log(d));
      lmin.push_back(std::log(lo));
      lmax.push_back(std::log(hi));
    }
  }
  if (ld.size() >= 2) {
    const auto fmin = stats::linear_fit(ld, lmin);
    const auto fmax = stats::linear_fit(ld, lmax);
    scan.min_exponent = fmin.slope;
    scan.max_exponent = fmax.slope;
    scan.min_r_squared = fmin.r_squared;
    scan.max_r_squared = fmax.r_squared;
  }
  return scan;
}

void write_field_binary(std::ostream& os, const GffGrid& field) {
  std::ostringstream h;
  h.precision(17);
  h << "MCRT-GRID field\nM " << field.M << "\na " << field.a << "\nbc " << to_string(field.bc)
    << "\ngamma " << field.cone_gamma << "\neps_c 0\nseed " << field.seed << '\n';
  write_header_and_data(os, h.str(), field.values);
}

GffGrid read_field_binary(std::istream& is) {
  GffGrid g;
  for (const auto& [k, v] : read_header(is, "MCRT-GRID field")) {
    if (k == "M") g.M = std::stoi(v);
    else if (k == "bc") g.bc = field_bc_from_string(v);
    else if (k == "gamma") g.cone_gamma = std::stod(v);
    else if (k == "seed") g.seed = std::stoull(v);
  }
  if (g.M < 1) throw std::runtime_error("grid header lacks M");
  g.a = 2.0 / g.M;
  g.values = read_data(is, static_cast<std::size_t>(g.M) * g.M);
  return g;
}

void write_measure_binary(std::ostream& os, const LqgMeasure& mu) {
  std::ostringstream h;
  h.precision(17);
  h << "MCRT-GRID measure\nM " << mu.M << "\na " << mu.a << "\nbc zero\ngamma " << mu.gamma
    << "\neps_c " << mu.eps_c << "\nseed " << mu.seed << '\n';
  write_header_and_data(os, h.str(), mu.mass);
}

LqgMeasure read_measure_binary(std::istream& is) {
  LqgMeasure mu;
  for (const auto& [k, v] : read_header(is, "MCRT-GRID measure")) {
    if (k == "M") mu.M = std::stoi(v);
    else if (k == "gamma") mu.gamma = std::stod(v);
    else if (k == "eps_c") mu.eps_c = std::stod(v);
    else if (k == "seed") mu.seed = std::stoull(v);
  }
  if (mu.M < 1) throw std::runtime_error("grid header lacks M");
  mu.a = 2.0 / mu.M;
  mu.mass = read_data(is, static_cast<std::size_t>(mu.M) * mu.M);
  return mu;
}

}  // namespace mcrt
