#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rmt {

struct KsResult {
  double statistic = 0.0;
  double critical_05 = 0.0;
  double critical_01 = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
};

/// Asymptotic Kolmogorov coefficient c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_coefficient(double alpha);

/// Two-sample Kolmogorov-Smirnov sup distance between empirical CDFs, with
/// asymptotic critical values c(alpha) sqrt((m+n)/(mn)). DomainError on
/// empty input.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;  // of the slope
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of log y on log x. Needs >= 3 points, all positive.
SlopeFit slope_fit(std::span<const double> xs, std::span<const double> ys);

/// Nearest-rank quantile: the ceil(p n)-th smallest value (1-based), p in (0, 1].
double quantile_nearest_rank(std::vector<double> values, double p);
inline double median(std::vector<double> values) { return quantile_nearest_rank(std::move(values), 0.5); }

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Neumaier-compensated mean and standard error of the mean.
MeanSe mean_se(std::span<const double> values);

/// Compensated (Neumaier) sum.
double stable_sum(std::span<const double> values);

}  // namespace rmt
