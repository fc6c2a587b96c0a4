#pragma once

#include <span>
#include <vector>

namespace mcrt::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);
double median(std::vector<double> xs);
/// Linear-interpolated quantile, q in [0,1].
double quantile(std::vector<double> xs, double q);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  double slope_stderr = 0;
  /// 95% normal-approximation interval for the slope.
  double slope_lo = 0;
  double slope_hi = 0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Asymptotic Kolmogorov survival function Q(lambda) = P[K > lambda].
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0;
  double p_value = 1;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample KS against Uniform[0,1).
KsResult ks_uniform(std::vector<double> u);

/// Upper tail P[chi2_dof > x].
double chi_square_survival(double x, double dof);

/// Total variation distance between two (unnormalized) histograms.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace mcrt::stats
