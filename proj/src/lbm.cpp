#include "mcrt/lbm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mcrt/stats.hpp"

namespace mcrt {

namespace {

using Point = std::complex<double>;

double wrap_coord(double x) {
  x = std::fmod(x + 1.0, 2.0);
  if (x < 0) x += 2.0;
  return x - 1.0;
}

int bin_of(Point z, double lo, double width, int k) {
  const int i = std::clamp(static_cast<int>(std::floor((z.real() - lo) / width)), 0, k - 1);
  const int j = std::clamp(static_cast<int>(std::floor((z.imag() - lo) / width)), 0, k - 1);
  return j * k + i;
}

}  // namespace

Density Density::constant(int M, double value) {
  Density d;
  d.M = M;
  d.a = 2.0 / M;
  d.f.assign(static_cast<std::size_t>(M) * M, value);
  return d;
}

Density Density::from_measure(const LqgMeasure& mu) {
  Density d;
  d.M = mu.M;
  d.a = mu.a;
  d.f = mu.mass;
  for (double& v : d.f) v /= mu.a * mu.a;
  return d;
}

double Density::operator()(Point z) const {
  if (periodic) z = {wrap_coord(z.real()), wrap_coord(z.imag())};
  const int i = std::min(M - 1, static_cast<int>((z.real() + 1.0) / a));
  const int j = std::min(M - 1, static_cast<int>((z.imag() + 1.0) / a));
  return f[static_cast<std::size_t>(j) * M + i];
}

Density Density::scaled(double lambda) const {
  Density d = *this;
  for (double& v : d.f) v *= lambda;
  return d;
}

std::vector<Point> brownian_path(Point start, double dt, long steps, Rng& rng) {
  std::vector<Point> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(start);
  const double sd = std::sqrt(dt);
  for (long k = 0; k < steps; ++k) {
    const double dx = sd * rng.normal();
    const double dy = sd * rng.normal();
    path.push_back(path.back() + Point(dx, dy));
  }
  return path;
}

std::vector<double> liouville_clock(const std::vector<Point>& bm, double dt, const Density& density) {
  std::vector<double> clock(bm.size(), 0.0);
  for (std::size_t i = 1; i < bm.size(); ++i) {
    const Point z = bm[i - 1];
    if (!density.inside(z)) {
      std::fill(clock.begin() + static_cast<long>(i), clock.end(), clock[i - 1]);
      break;
    }
    clock[i] = clock[i - 1] + density(z) * dt;
  }
  return clock;
}

LbmPath make_lbm_path(std::vector<Point> bm, double dt, const Density& density, double m0, double c) {
  LbmPath p;
  p.dt = dt;
  p.m0 = m0;
  p.c = c;
  p.clock = liouville_clock(bm, dt, density);
  for (std::size_t i = 0; i < bm.size(); ++i)
    if (!density.inside(bm[i])) {
      p.exit_index = static_cast<long>(i);
      break;
    }
  p.positions = std::move(bm);
  return p;
}

Point time_change(const LbmPath& lbm, double t) {
  if (lbm.positions.empty()) throw std::invalid_argument("time_change: empty path");
  const double s = t * lbm.m0 * lbm.c;
  if (s <= 0) return lbm.positions.front();
  if (s > lbm.clock.back()) throw std::out_of_range("time_change: t beyond simulated horizon");
  const auto it = std::lower_bound(lbm.clock.begin(), lbm.clock.end(), s);
  const auto i = static_cast<std::size_t>(it - lbm.clock.begin());
  const double span = lbm.clock[i] - lbm.clock[i - 1];
  const double frac = span > 0 ? (s - lbm.clock[i - 1]) / span : 1.0;
  return lbm.positions[i - 1] + frac * (lbm.positions[i] - lbm.positions[i - 1]);
}

double quantum_exit_time(const Density& density, double dt, double radius, long max_steps, Rng& rng,
                         bool* exited) {
  const double sd = std::sqrt(dt);
  const double r2 = radius * radius;
  Point z = 0;
  double phi = 0;
  for (long k = 0; k < max_steps; ++k) {
    phi += density(z) * dt;
    z += Point(sd * rng.normal(), sd * rng.normal());
    if (std::norm(z) >= r2) {
      if (exited) *exited = true;
      return phi;
    }
  }
  if (exited) *exited = false;
  return phi;
}

M0Estimate estimate_m0(const Density& density, std::size_t n_samples, const Rng& rng,
                       const M0Options& opts) {
  if (n_samples == 0) throw std::invalid_argument("estimate_m0: no samples");
  if (opts.radius >= 1.0) throw std::invalid_argument("estimate_m0: radius must stay inside the grid");
  const double dt = opts.dt > 0 ? opts.dt : density.default_dt();
  M0Estimate est;
  est.exit_times.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    Rng r = rng.split(k);
    bool exited = false;
    const double tau = quantum_exit_time(density, dt, opts.radius, opts.max_steps, r, &exited);
    if (exited) {
      ++est.exited;
      est.exit_times.push_back(tau);
    } else {
      ++est.truncated;
      est.exit_times.push_back(std::numeric_limits<double>::infinity());
    }
  }
  if (2 * est.truncated >= n_samples)
    throw std::runtime_error("estimate_m0: insufficient horizon, most paths did not exit");
  est.median = stats::median(est.exit_times);
  Rng boot = rng.split(~0ULL);
  std::vector<double> meds, resample(n_samples);
  for (int b = 0; b < 200; ++b) {
    for (auto& x : resample) x = est.exit_times[boot.below(n_samples)];
    meds.push_back(stats::median(resample));
  }
  est.ci_lo = stats::quantile(meds, 0.025);
  est.ci_hi = stats::quantile(meds, 0.975);
  return est;
}

InvarianceRecord invariance_test(const Density& density, double t, std::size_t n, const Rng& rng,
                                 const InvarianceOptions& opts) {
  if (t < 0) throw std::invalid_argument("invariance_test: t must be nonnegative");
  Density dens = density;
  dens.periodic = opts.wrap;
  const double dt = opts.dt > 0 ? opts.dt : dens.default_dt();
  const double rho = opts.wrap ? 1.0 : opts.rho;
  const int k = opts.bins_per_side;
  const double width = 2.0 * rho / k;

  // Cells meeting the domain, drawn by mass; points uniform in the cell and
  // rejected (whole draw) when they fall outside B_rho.
  std::vector<int> cells;
  std::vector<double> cdf;
  double acc = 0;
  for (int j = 0; j < dens.M; ++j)
    for (int i = 0; i < dens.M; ++i) {
      const double x0 = -1 + i * dens.a, y0 = -1 + j * dens.a;
      const double nx = std::clamp(0.0, x0, x0 + dens.a), ny = std::clamp(0.0, y0, y0 + dens.a);
      if (!opts.wrap && nx * nx + ny * ny > rho * rho) continue;
      const double m = dens.f[static_cast<std::size_t>(j) * dens.M + i];
      if (m <= 0) continue;
      acc += m;
      cells.push_back(j * dens.M + i);
      cdf.push_back(acc);
    }
  if (cells.empty()) throw std::invalid_argument("invariance_test: no mass in the domain");

  InvarianceRecord rec;
  rec.t = t;
  rec.samples = n;
  rec.start_hist.assign(static_cast<std::size_t>(k) * k, 0.0);
  rec.end_hist.assign(static_cast<std::size_t>(k) * k, 0.0);
  const double sd = std::sqrt(dt);
  for (std::size_t s = 0; s < n; ++s) {
    Rng r = rng.split(s);
    Point z;
    for (;;) {
      const double u = r.uniform() * acc;
      const auto c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      const int cell = cells[std::min(c, cells.size() - 1)];
      z = {-1 + (cell % dens.M + r.uniform()) * dens.a, -1 + (cell / dens.M + r.uniform()) * dens.a};
      if (opts.wrap || std::norm(z) < rho * rho) break;
    }
    const Point start = z;
    double phi = 0;
    bool alive = true;
    while (phi < t) {
      const double step = dens(z) * dt;
      const Point next = z + Point(sd * r.normal(), sd * r.normal());
      if (phi + step >= t) {
        z += ((t - phi) / step) * (next - z);
        phi = t;
      } else {
        z = next;
        phi += step;
      }
      if (opts.wrap) {
        z = {wrap_coord(z.real()), wrap_coord(z.imag())};
      } else if (std::norm(z) >= rho * rho) {
        alive = false;
        break;
      }
    }
    if (!alive) continue;
    ++rec.survivors;
    rec.start_hist[bin_of(start, -rho, width, k)] += 1;
    rec.end_hist[bin_of(z, -rho, width, k)] += 1;
  }
  if (rec.survivors < opts.min_survivors)
    throw InsufficientSurvivors("invariance_test: too few survivors (" + std::to_string(rec.survivors) + ")");
  rec.tv = stats::total_variation(rec.start_hist, rec.end_hist);
  int used = 0;
  for (std::size_t b = 0; b < rec.start_hist.size(); ++b) {
    const double tot = rec.start_hist[b] + rec.end_hist[b];
    if (tot <= 0) continue;
    const double d = rec.start_hist[b] - rec.end_hist[b];
    rec.chi_square += d * d / tot;
    ++used;
  }
  rec.dof = std::max(1, used - 1);
  rec.p_value = stats::chi_square_survival(rec.chi_square, rec.dof);
  return rec;
}

void write_lbm_csv(std::ostream& os, const LbmPath& lbm) {
  os << "t_quantum,x,y\n" << std::setprecision(17);
  const double scale = lbm.m0 * lbm.c;
  for (std::size_t i = 0; i < lbm.positions.size(); ++i)
    os << lbm.clock[i] / scale << ',' << lbm.positions[i].real() << ',' << lbm.positions[i].imag() << '\n';
}

}  // namespace mcrt
