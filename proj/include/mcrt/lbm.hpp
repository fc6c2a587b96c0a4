#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mcrt/field_lqg.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

/// Piecewise-constant clock density on the cells of an M x M grid over
/// [-1,1]^2 (cell mass divided by cell area).
struct Density {
  int M = 0;
  double a = 0;
  bool periodic = false;
  std::vector<double> f;

  static Density constant(int M, double value);
  static Density from_measure(const LqgMeasure& mu);

  bool inside(std::complex<double> z) const {
    return periodic || (z.real() >= -1 && z.real() < 1 && z.imag() >= -1 && z.imag() < 1);
  }
  /// Density at z; z must be inside (or the grid periodic).
  double operator()(std::complex<double> z) const;
  /// Default Brownian step a^2/4.
  double default_dt() const { return a * a / 4.0; }
  Density scaled(double lambda) const;
};

struct LbmPath {
  double dt = 0;
  std::vector<std::complex<double>> positions;
  std::vector<double> clock;
  double c = 1.0;
  double m0 = 1.0;
  /// First knot outside the grid (clock frozen from there on), or -1.
  long exit_index = -1;
};

/// Base planar Brownian motion (each coordinate with variance dt per step)
/// from `start`, `steps` steps.
std::vector<std::complex<double>> brownian_path(std::complex<double> start, double dt, long steps, Rng& rng);

/// phi(t_i) = sum_{j<i} f(B_{t_j}) dt, frozen once the path has left the grid.
std::vector<double> liouville_clock(const std::vector<std::complex<double>>& bm, double dt,
                                    const Density& density);

LbmPath make_lbm_path(std::vector<std::complex<double>> bm, double dt, const Density& density,
                      double m0 = 1.0, double c = 1.0);

/// Base position at phi^{-1}(t m0 c), linearly interpolated between knots.
std::complex<double> time_change(const LbmPath& lbm, double t);

struct M0Options {
  double radius = 0.5;
  /// Brownian step; 0 selects density.default_dt().
  double dt = 0;
  /// Steps before a sample is declared not to have exited.
  long max_steps = 10'000'000;
};

struct M0Estimate {
  double median = 0;
  /// Bootstrap 95% interval of the median.
  double ci_lo = 0;
  double ci_hi = 0;
  std::size_t exited = 0;
  std::size_t truncated = 0;
  std::vector<double> exit_times;
};

/// Quantum exit time from B_radius(0): the clock at the first knot with
/// |B| >= radius. Sample k uses rng.split(k).
double quantum_exit_time(const Density& density, double dt, double radius, long max_steps, Rng& rng,
                         bool* exited = nullptr);

/// Median quantum exit time from B_{1/2} over independent base paths from 0
/// (quenched: one density).
M0Estimate estimate_m0(const Density& density, std::size_t n_samples, const Rng& rng,
                       const M0Options& opts = {});

struct InvarianceOptions {
  double rho = 0.75;
  int bins_per_side = 4;
  /// Run on the torus [-1,1]^2 without killing.
  bool wrap = false;
  double dt = 0;
  std::size_t min_survivors = 100;
};

struct InvarianceRecord {
  double t = 0;
  std::size_t samples = 0;
  std::size_t survivors = 0;
  double tv = 0;
  double chi_square = 0;
  int dof = 0;
  double p_value = 1;
  std::vector<double> start_hist;
  std::vector<double> end_hist;
};

class InsufficientSurvivors : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Starts drawn from the density restricted to B_rho, run for quantum time t
/// and killed on leaving B_rho. Compares the binned end positions of the
/// survivors with their binned start positions (the survival-reweighted
/// measure); equal in law when the measure is reversible.
InvarianceRecord invariance_test(const Density& density, double t, std::size_t n, const Rng& rng,
                                 const InvarianceOptions& opts = {});

/// CSV export: t_quantum,x,y per knot.
void write_lbm_csv(std::ostream& os, const LbmPath& lbm);

}  // namespace mcrt
