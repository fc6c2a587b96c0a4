#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mcrt/lbm.hpp"

using namespace mcrt;
using Point = std::complex<double>;

TEST(LbmClock, ConstantDensityIsLinear) {
  Rng rng(3);
  const double dt = 1e-5;
  const auto bm = brownian_path(0, dt, 500, rng);
  const auto one = liouville_clock(bm, dt, Density::constant(32, 1.0));
  const auto two = liouville_clock(bm, dt, Density::constant(32, 2.0));
  for (std::size_t i = 0; i < bm.size(); ++i) {
    EXPECT_NEAR(one[i], i * dt, 1e-12);
    EXPECT_NEAR(two[i], 2 * i * dt, 1e-12);
  }
}

TEST(LbmClock, HalfPlaneIndicator) {
  Density d = Density::constant(64, 0.0);
  for (int j = 0; j < d.M; ++j)
    for (int i = 0; i < d.M / 2; ++i) d.f[j * d.M + i] = 1.0;
  const double dt = 1e-3, h = 0.0137;
  std::vector<Point> bm;
  for (int i = 0; i <= 80; ++i) bm.emplace_back(-0.5 + i * h, 0.01);
  const auto clock = liouville_clock(bm, dt, d);
  double acc = 0;
  for (std::size_t i = 0; i < bm.size(); ++i) {
    EXPECT_NEAR(clock[i], acc, 1e-12);
    if (bm[i].real() < 0) acc += dt;
  }
}

TEST(LbmClock, FrozenOutsideGrid) {
  const std::vector<Point> bm{{0.9, 0}, {0.99, 0}, {1.2, 0}, {1.5, 0}, {0.5, 0}};
  const auto lbm = make_lbm_path(bm, 0.1, Density::constant(16, 1.0));
  EXPECT_EQ(lbm.exit_index, 2);
  EXPECT_NEAR(lbm.clock[2], 0.2, 1e-15);
  EXPECT_EQ(lbm.clock[3], lbm.clock[2]);
  EXPECT_EQ(lbm.clock[4], lbm.clock[2]);
}

TEST(LbmTimeChange, RoundTrip) {
  Rng rng(5);
  const double dt = 1e-3;
  const auto bm = brownian_path(0, dt, 400, rng);
  Density d = Density::constant(32, 1.0);
  for (std::size_t c = 0; c < d.f.size(); ++c) d.f[c] = 0.5 + (c % 7) * 0.25;
  const auto lbm = make_lbm_path(bm, dt, d, 2.0, 1.5);
  EXPECT_EQ(time_change(lbm, 0.0), bm.front());
  for (std::size_t i = 1; i < bm.size(); i += 37) {
    const Point z = time_change(lbm, lbm.clock[i] / (lbm.m0 * lbm.c));
    EXPECT_NEAR(std::abs(z - bm[i]), 0.0, 1e-9);
  }
  EXPECT_THROW(time_change(lbm, lbm.clock.back() / 3.0 + 1.0), std::out_of_range);
}

TEST(LbmTimeChange, LinearInterpolation) {
  const std::vector<Point> bm{{0, 0}, {0.1, 0}, {0.1, 0.2}};
  const auto lbm = make_lbm_path(bm, 0.5, Density::constant(8, 1.0));
  EXPECT_NEAR(std::abs(time_change(lbm, 0.25) - Point(0.05, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(time_change(lbm, 0.75) - Point(0.1, 0.1)), 0.0, 1e-15);
}

TEST(LbmCsv, Header) {
  const std::vector<Point> bm{{0, 0}, {0.1, 0}};
  std::ostringstream os;
  write_lbm_csv(os, make_lbm_path(bm, 0.5, Density::constant(8, 1.0)));
  EXPECT_EQ(os.str().substr(0, 14), "t_quantum,x,y\n");
}

TEST(LbmM0, ScalesLinearlyWithDensity) {
  const Density d = Density::constant(64, 1.0);
  const Rng rng(11);
  M0Options opts;
  opts.dt = d.default_dt();
  const auto a = estimate_m0(d, 300, rng, opts);
  const auto b = estimate_m0(d.scaled(2.0), 300, rng, opts);
  const auto c = estimate_m0(d.scaled(0.3), 300, rng, opts);
  EXPECT_EQ(b.median, 2.0 * a.median);
  EXPECT_NEAR(c.median, 0.3 * a.median, 1e-12 * a.median);
  EXPECT_EQ(a.truncated, 0u);
}

// Median of the exit time of planar Brownian motion from a disk of radius
// 1/2, from the Bessel series of the survival function.
TEST(LbmM0, LebesgueMatchesBesselMedian) {
  const Density d = Density::constant(128, 1.0);
  const auto est = estimate_m0(d, 4000, Rng(17));
  EXPECT_NEAR(est.median, 0.100262, 0.05 * 0.100262);
  EXPECT_LE(est.ci_lo, est.median);
  EXPECT_GE(est.ci_hi, est.median);
}

TEST(LbmM0, StableUnderDoubling) {
  const Density d = Density::constant(64, 1.0);
  const auto small = estimate_m0(d, 1000, Rng(23));
  const auto big = estimate_m0(d, 2000, Rng(23));
  EXPECT_GE(big.median, small.ci_lo);
  EXPECT_LE(big.median, small.ci_hi);
}

TEST(LbmM0, Errors) {
  const Density d = Density::constant(16, 1.0);
  EXPECT_THROW(estimate_m0(d, 0, Rng(1)), std::invalid_argument);
  M0Options opts;
  opts.radius = 1.0;
  EXPECT_THROW(estimate_m0(d, 10, Rng(1), opts), std::invalid_argument);
  opts.radius = 0.5;
  opts.max_steps = 2;
  EXPECT_THROW(estimate_m0(d, 10, Rng(1), opts), std::runtime_error);
}

TEST(LbmInvariance, ZeroTimeIsExact) {
  const auto rec = invariance_test(Density::constant(32, 1.0), 0.0, 2000, Rng(2));
  EXPECT_EQ(rec.tv, 0.0);
  EXPECT_EQ(rec.survivors, 2000u);
}

TEST(LbmInvariance, StartsFollowDensity) {
  Density d = Density::constant(32, 1.0);
  for (int j = 0; j < d.M; ++j)
    for (int i = d.M / 2; i < d.M; ++i) d.f[j * d.M + i] = 3.0;
  InvarianceOptions opts;
  opts.wrap = true;
  opts.bins_per_side = 2;
  const auto rec = invariance_test(d, 0.0, 20000, Rng(4), opts);
  const double right = rec.start_hist[1] + rec.start_hist[3];
  EXPECT_NEAR(right / 20000.0, 0.75, 0.015);
}

TEST(LbmInvariance, TorusLebesgueIsInvariant) {
  InvarianceOptions opts;
  opts.wrap = true;
  const auto rec = invariance_test(Density::constant(32, 1.0), 0.05, 20000, Rng(6), opts);
  EXPECT_EQ(rec.survivors, 20000u);
  EXPECT_LE(rec.tv, 0.05);
  EXPECT_GT(rec.p_value, 1e-3);
}

TEST(LbmInvariance, TooFewSurvivors) {
  InvarianceOptions opts;
  opts.rho = 0.2;
  EXPECT_THROW(invariance_test(Density::constant(32, 1.0), 5.0, 300, Rng(8), opts), InsufficientSurvivors);
}
