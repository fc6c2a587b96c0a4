#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mcrt/field_lqg.hpp"

using namespace mcrt;

namespace {

// 2 pi times the inverse of the Dirichlet 5-point Laplacian on the interior
// (M-2)^2 cells, indexed like the grid.
Eigen::MatrixXd dense_zero_boundary_cov(int M) {
  const int N = M - 2;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N * N, N * N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const int v = j * N + i;
      L(v, v) = 4;
      if (i > 0) L(v, v - 1) = -1;
      if (i + 1 < N) L(v, v + 1) = -1;
      if (j > 0) L(v, v - N) = -1;
      if (j + 1 < N) L(v, v + N) = -1;
    }
  return 2 * std::numbers::pi * L.inverse();
}

Eigen::MatrixXd dense_torus_cov(int M) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M * M, M * M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) {
      const int v = j * M + i;
      L(v, v) += 4;
      L(v, j * M + (i + 1) % M) -= 1;
      L(v, j * M + (i + M - 1) % M) -= 1;
      L(v, ((j + 1) % M) * M + i) -= 1;
      L(v, ((j + M - 1) % M) * M + i) -= 1;
    }
  return 2 * std::numbers::pi * L.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

TEST(Gff, ZeroBoundaryRingVanishes) {
  const auto g = sample_gff(32, FieldBc::ZeroBoundary, 3);
  for (int k = 0; k < 32; ++k) {
    EXPECT_EQ(g.at(0, k), 0.0);
    EXPECT_EQ(g.at(31, k), 0.0);
    EXPECT_EQ(g.at(k, 0), 0.0);
    EXPECT_EQ(g.at(k, 31), 0.0);
  }
  for (double v : g.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_THROW(sample_gff(4, FieldBc::ZeroBoundary, 1), std::invalid_argument);
}

TEST(Gff, DeterministicPerSeed) {
  EXPECT_EQ(sample_gff(16, FieldBc::TorusProjected, 5).values, sample_gff(16, FieldBc::TorusProjected, 5).values);
  EXPECT_NE(sample_gff(16, FieldBc::ZeroBoundary, 5).values, sample_gff(16, FieldBc::ZeroBoundary, 6).values);
}

TEST(Gff, ZeroBoundaryCovarianceMatchesDenseGreen) {
  const int M = 16, N = M - 2, samples = 10000;
  const auto C = dense_zero_boundary_cov(M);
  // Probe pairs (grid coordinates); the first is the centre variance.
  const std::vector<std::array<int, 4>> probes{
      {8, 8, 8, 8}, {8, 8, 9, 8}, {3, 4, 10, 12}, {1, 1, 1, 1}, {5, 7, 6, 9}, {2, 13, 13, 2}};
  std::vector<double> acc(probes.size(), 0.0);
  for (int s = 0; s < samples; ++s) {
    const auto g = sample_gff(M, FieldBc::ZeroBoundary, 100 + s);
    for (std::size_t p = 0; p < probes.size(); ++p)
      acc[p] += g.at(probes[p][0], probes[p][1]) * g.at(probes[p][2], probes[p][3]);
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const int a = (probes[p][1] - 1) * N + probes[p][0] - 1;
    const int b = (probes[p][3] - 1) * N + probes[p][2] - 1;
    const double cov = C(a, b);
    const double se = std::sqrt((C(a, a) * C(b, b) + cov * cov) / samples);
    EXPECT_NEAR(acc[p] / samples, cov, 3 * se) << "probe " << p;
  }
}

TEST(Gff, TorusIncrementCovarianceMatchesDenseGreen) {
  const int M = 16, samples = 10000;
  const auto C = dense_torus_cov(M);
  const std::vector<std::array<int, 4>> probes{{0, 0, 8, 8}, {3, 3, 4, 3}, {1, 5, 12, 9}, {7, 7, 7, 15}};
  std::vector<double> acc(probes.size(), 0.0);
  for (int s = 0; s < samples; ++s) {
    const auto g = sample_gff(M, FieldBc::TorusProjected, 500 + s);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double d = g.at(probes[p][0], probes[p][1]) - g.at(probes[p][2], probes[p][3]);
      acc[p] += d * d;
    }
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const int a = probes[p][1] * M + probes[p][0];
    const int b = probes[p][3] * M + probes[p][2];
    const double var = C(a, a) + C(b, b) - 2 * C(a, b);
    EXPECT_NEAR(acc[p] / samples, var, 3 * std::sqrt(2.0 / samples) * var) << "probe " << p;
  }
}

TEST(Gff, TorusRecentredOnUnitCircle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto g = sample_gff(64, FieldBc::TorusProjected, seed);
    EXPECT_NEAR(circle_average(g, 0.0, 1.0), 0.0, 1e-12);
  }
}

TEST(Cone, LogarithmicAddition) {
  const GffGrid zero(64, FieldBc::ZeroBoundary);
  const double gamma = 1.3;
  const auto f = add_cone_singularity(zero, gamma);
  EXPECT_EQ(f.cone_gamma, gamma);
  double max_val = 0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      const double r = std::abs(f.centre(i, j));
      EXPECT_NEAR(f.at(i, j), gamma * std::log(1.0 / std::max(r, f.a / 2)), 1e-12);
      max_val = std::max(max_val, f.at(i, j));
    }
  EXPECT_LE(max_val, gamma * std::log(2.0 / f.a) + 1e-12);
  // Closed-form values at |z| = 1 and |z| = 1/e via the interpolated
  // circle average of the added term (exact for large M up to interpolation).
  const auto big = add_cone_singularity(GffGrid(1024, FieldBc::ZeroBoundary), gamma);
  EXPECT_NEAR(circle_average(big, 0.0, 1.0 / std::numbers::e), gamma, 1e-3);
  // Radially decreasing along the diagonal.
  for (int i = 32; i + 1 < 64; ++i) EXPECT_GT(f.at(i, i), f.at(i + 1, i + 1));
}

TEST(CircleAverage, ConstantAffineAndLog) {
  GffGrid c(64, FieldBc::ZeroBoundary);
  std::fill(c.values.begin(), c.values.end(), 2.5);
  EXPECT_NEAR(circle_average(c, {0.1, -0.2}, 0.3), 2.5, 1e-12);
  GffGrid aff(64, FieldBc::ZeroBoundary);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) aff.at(i, j) = 1.0 + 2.0 * aff.centre(i, j).real() - 0.5 * aff.centre(i, j).imag();
  const std::complex<double> z{0.2, 0.1};
  EXPECT_NEAR(circle_average(aff, z, 0.4), 1.0 + 2 * 0.2 - 0.5 * 0.1, 1e-12);

  const double gamma = 1.0;
  const auto lg = add_cone_singularity(GffGrid(512, FieldBc::ZeroBoundary), gamma);
  for (double r : {0.05, 0.1, 0.25, 0.5})
    EXPECT_NEAR(circle_average(lg, 0.0, r), gamma * std::log(1 / r), 1e-3) << "r=" << r;

  EXPECT_THROW(circle_average(c, 0.0, c.a), std::invalid_argument);
  EXPECT_THROW(circle_average(c, {0.9, 0.0}, 0.2), std::invalid_argument);
}

TEST(CircleAverage, LinearInField) {
  const auto f = sample_gff(64, FieldBc::ZeroBoundary, 1);
  const auto g = sample_gff(64, FieldBc::ZeroBoundary, 2);
  GffGrid h = f;
  for (std::size_t k = 0; k < h.values.size(); ++k) h.values[k] = 2 * f.values[k] - 3 * g.values[k];
  const std::complex<double> z{-0.1, 0.3};
  EXPECT_NEAR(circle_average(h, z, 0.25), 2 * circle_average(f, z, 0.25) - 3 * circle_average(g, z, 0.25), 1e-12);
}

TEST(Measure, ZeroFieldAndShift) {
  const GffGrid zero(32, FieldBc::ZeroBoundary);
  const double gamma = 1.0;
  const auto mu = build_lqg_measure(zero, gamma);
  EXPECT_DOUBLE_EQ(mu.eps_c, 4 * zero.a);
  // A zero-boundary field is 0 outside the grid too, so every cell is equal.
  for (double m : mu.mass) EXPECT_NEAR(m, zero.a * zero.a * std::pow(mu.eps_c, 0.5), 1e-15);

  auto f = sample_gff(32, FieldBc::TorusProjected, 3);
  const auto base = build_lqg_measure(f, gamma);
  for (double& v : f.values) v += 0.7;
  const auto shifted = build_lqg_measure(f, gamma);
  for (std::size_t k = 0; k < base.mass.size(); ++k)
    EXPECT_NEAR(shifted.mass[k] / base.mass[k], std::exp(0.7 * gamma), 1e-12);
  EXPECT_THROW(build_lqg_measure(zero, gamma, zero.a), std::invalid_argument);
}

TEST(Measure, PositiveAndTotalIsCellSum) {
  const auto f = sample_gff(64, FieldBc::ZeroBoundary, 8);
  const auto mu = build_lqg_measure(f, 1.5);
  double s = 0;
  for (double m : mu.mass) {
    EXPECT_GT(m, 0.0);
    s += m;
  }
  EXPECT_EQ(mu.total(), s);
  EXPECT_NEAR(mu.ball_mass(0.0, 10.0), s, 1e-12 * s);
}

TEST(BallMass, LebesgueAreaScaling) {
  const auto leb = lebesgue_measure(1024);
  std::vector<std::complex<double>> centres{{0, 0}, {0.2, 0.1}, {-0.3, 0.25}};
  const std::vector<double> deltas{0.05, 0.1, 0.2, 0.4};
  const auto scan = ball_mass_scan(leb, centres, deltas);
  EXPECT_NEAR(scan.min_exponent, 2.0, 0.01);
  EXPECT_NEAR(scan.max_exponent, 2.0, 0.01);
  auto doubled = leb;
  for (double& m : doubled.mass) m *= 2;
  const auto scan2 = ball_mass_scan(doubled, centres, deltas);
  EXPECT_NEAR(scan2.min_exponent, scan.min_exponent, 1e-12);
  EXPECT_NEAR(scan2.max_exponent, scan.max_exponent, 1e-12);
}

TEST(GridIo, RoundTrip) {
  const auto f = add_cone_singularity(sample_gff(16, FieldBc::TorusProjected, 4), 0.8);
  std::stringstream ss;
  write_field_binary(ss, f);
  const auto back = read_field_binary(ss);
  EXPECT_EQ(back.values, f.values);
  EXPECT_EQ(back.bc, FieldBc::TorusProjected);
  EXPECT_EQ(back.cone_gamma, 0.8);
  EXPECT_EQ(back.seed, 4u);
  const auto mu = build_lqg_measure(f, 0.8);
  std::stringstream ms;
  write_measure_binary(ms, mu);
  const auto mback = read_measure_binary(ms);
  EXPECT_EQ(mback.mass, mu.mass);
  EXPECT_EQ(mback.eps_c, mu.eps_c);
}
