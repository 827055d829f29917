#include "rmt/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: both samples must be nonempty");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());

  // Walk the merged order; evaluate the CDF gap after consuming every tie.
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / m - j / n));
  }
  KsResult r;
  r.statistic = d;
  r.m = x.size();
  r.n = y.size();
  const double scale = std::sqrt((m + n) / (m * n));
  r.critical_05 = ks_coefficient(0.05) * scale;
  r.critical_01 = ks_coefficient(0.01) * scale;
  return r;
}

SlopeFit slope_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("slope_fit: xs and ys differ in length");
  if (xs.size() < 3) throw DomainError(fmt::format("slope_fit: need >= 3 points, got {}", xs.size()));
  const std::size_t k = xs.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t p = 0; p < k; ++p) {
    if (!(xs[p] > 0.0) || !(ys[p] > 0.0)) {
      throw DomainError(fmt::format("slope_fit: nonpositive input at point {} ({}, {})", p, xs[p], ys[p]));
    }
    lx[p] = std::log(xs[p]);
    ly[p] = std::log(ys[p]);
  }
  const double mx = stable_sum(lx) / k;
  const double my = stable_sum(ly) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    sxx += (lx[p] - mx) * (lx[p] - mx);
    sxy += (lx[p] - mx) * (ly[p] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("slope_fit: all x values coincide");
  SlopeFit f;
  f.points = k;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double e = ly[p] - f.intercept - f.slope * lx[p];
    rss += e * e;
  }
  const double dof = static_cast<double>(k) - 2.0;
  f.std_error = std::sqrt(rss / dof / sxx);
  const double t = boost::math::quantile(boost::math::students_t(dof), 0.975);
  f.ci95_low = f.slope - t * f.std_error;
  f.ci95_high = f.slope + t * f.std_error;
  return f;
}

double quantile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError(fmt::format("quantile level {} not in (0, 1]", p));
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe r;
  r.count = values.size();
  if (values.empty()) return r;
  r.mean = stable_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) sq[k] = (values[k] - r.mean) * (values[k] - r.mean);
    const double var = stable_sum(sq) / static_cast<double>(values.size() - 1);
    r.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return r;
}

}  // namespace rmt
