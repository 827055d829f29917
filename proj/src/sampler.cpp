#include "rmt/sampler.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

std::string to_string(SymmetryClass s) { return s == SymmetryClass::symmetric ? "symmetric" : "hermitian"; }

SymmetryClass symmetry_from_string(const std::string& name) {
  if (name == "symmetric" || name == "goe" || name == "real") return SymmetryClass::symmetric;
  if (name == "hermitian" || name == "gue" || name == "complex") return SymmetryClass::hermitian;
  throw ConfigError(fmt::format("unknown symmetry class '{}' (expected symmetric|hermitian)", name));
}

EntryDistribution EntryDistribution::gaussian() { return {Law::gaussian, 0.5}; }
EntryDistribution EntryDistribution::rademacher() { return {Law::rademacher, 0.5}; }
EntryDistribution EntryDistribution::uniform() { return {Law::uniform, 0.5}; }

EntryDistribution EntryDistribution::two_point(double a, double b, double p) {
  if (!(p > 0.0 && p < 1.0) || !(a != b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError(fmt::format("two_point law needs a != b and 0 < p < 1, got a={} b={} p={}", a, b, p));
  }
  EntryDistribution d(Law::two_point, 0.5);
  const double mean = p * a + (1.0 - p) * b;
  const double sd = std::abs(a - b) * std::sqrt(p * (1.0 - p));
  d.raw_a_ = a;
  d.raw_b_ = b;
  d.p_ = p;
  d.value_a_ = (a - mean) / sd;
  d.value_b_ = (b - mean) / sd;
  // Largest theta in {1/2, 1/4, ...} with P(|x| >= t) <= exp(-t^theta)/theta at
  // the atoms; the tail is a step function so the atoms are the binding points.
  auto tail_ok = [&](double theta) {
    for (double v : {d.value_a_, d.value_b_}) {
      const double t = std::abs(v);
      if (t < 1.0) continue;
      double mass = 0.0;
      if (std::abs(d.value_a_) >= t) mass += p;
      if (std::abs(d.value_b_) >= t) mass += 1.0 - p;
      if (mass > std::exp(-std::pow(t, theta)) / theta) return false;
    }
    return true;
  };
  while (!tail_ok(d.theta_) && d.theta_ > 1e-6) d.theta_ /= 2.0;
  return d;
}

EntryDistribution EntryDistribution::parse(const std::string& spec) {
  if (spec == "gaussian" || spec == "normal") return gaussian();
  if (spec == "rademacher" || spec == "bernoulli") return rademacher();
  if (spec == "uniform") return uniform();
  const std::string prefix = "two_point:";
  if (spec.rfind(prefix, 0) == 0) {
    std::string rest = spec.substr(prefix.size());
    for (char& c : rest) {
      if (c == ',') c = ' ';
    }
    std::istringstream in(rest);
    double a = 0.0, b = 0.0, p = 0.0;
    if (!(in >> a >> b >> p)) throw ConfigError(fmt::format("cannot parse two_point law '{}' (two_point:a,b,p)", spec));
    return two_point(a, b, p);
  }
  throw ConfigError(fmt::format("unknown entry law '{}' (gaussian|rademacher|uniform|two_point:a,b,p)", spec));
}

std::string EntryDistribution::name() const {
  switch (law_) {
    case Law::gaussian: return "gaussian";
    case Law::rademacher: return "rademacher";
    case Law::uniform: return "uniform";
    case Law::two_point: return fmt::format("two_point:{},{},{}", raw_a_, raw_b_, p_);
  }
  return "unknown";
}

double EntryDistribution::moment(int k) const {
  if (k < 0) throw DomainError("moment order must be nonnegative");
  if (k == 0) return 1.0;
  switch (law_) {
    case Law::gaussian: {
      if (k % 2) return 0.0;
      double m = 1.0;
      for (int j = k - 1; j > 1; j -= 2) m *= j;
      return m;
    }
    case Law::rademacher:
      return k % 2 ? 0.0 : 1.0;
    case Law::uniform:
      return k % 2 ? 0.0 : std::pow(3.0, k / 2.0) / (k + 1);
    case Law::two_point:
      return p_ * std::pow(value_a_, k) + (1.0 - p_) * std::pow(value_b_, k);
  }
  return 0.0;
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(sample_index), static_cast<std::uint32_t>(sample_index >> 32),
                    0x9e3779b9u};
  return RngStream{std::mt19937_64(seq)};
}

int HermitianMatrix::n() const {
  return visit([](const auto& m) { return static_cast<int>(m.rows()); });
}

ComplexMatrix HermitianMatrix::to_complex() const {
  if (is_real()) return real().cast<std::complex<double>>();
  return complex();
}

std::complex<double> HermitianMatrix::operator()(int i, int j) const {
  return visit([i, j](const auto& m) { return std::complex<double>(m(i, j)); });
}

double HermitianMatrix::hermiticity_defect() const {
  return visit([](const auto& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); });
}

Eigen::VectorXd eigenvalues_of(const HermitianMatrix& h) {
  return h.visit([](const auto& m) -> Eigen::VectorXd {
    using M = std::decay_t<decltype(m)>;
    Eigen::SelfAdjointEigenSolver<M> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalue solver did not converge");
    return solver.eigenvalues();
  });
}

WignerSample::WignerSample(HermitianMatrix h, std::shared_ptr<const VarianceProfile> profile, Provenance provenance)
    : h_(std::move(h)), profile_(std::move(profile)), provenance_(std::move(provenance)), cache_(std::make_shared<Cache>()) {}

const Eigen::VectorXd& WignerSample::eigenvalues() const {
  std::call_once(cache_->once, [this] { cache_->values = eigenvalues_of(h_); });
  return cache_->values;
}

WignerSample sample_matrix(std::shared_ptr<const VarianceProfile> profile, const EntryDistribution& d, SymmetryClass s,
                           RngStream& stream, Provenance provenance) {
  const int n = profile->n();
  const auto& var = profile->sigma2();
  EntryGenerator gen(d);
  auto& eng = stream.engine;
  provenance.distribution = d.name();
  provenance.profile_hash = profile->hash();

  if (s == SymmetryClass::symmetric) {
    RealMatrix h(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        const double x = std::sqrt(var(i, j)) * gen(eng);
        h(i, j) = x;
        h(j, i) = x;
      }
    }
    return WignerSample(HermitianMatrix(std::move(h)), std::move(profile), std::move(provenance));
  }

  ComplexMatrix h(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double sigma = std::sqrt(var(i, j) / 2.0);
      const double re = gen(eng);
      const double im = gen(eng);
      h(i, j) = {sigma * re, sigma * im};
      h(j, i) = std::conj(h(i, j));
    }
    h(j, j) = std::sqrt(var(j, j)) * gen(eng);
  }
  return WignerSample(HermitianMatrix(std::move(h)), std::move(profile), std::move(provenance));
}

HermitianMatrix gaussian_ensemble(int n, SymmetryClass s, RngStream& stream) {
  auto flat = std::make_shared<const VarianceProfile>(flat_profile(n));
  return sample_matrix(flat, EntryDistribution::gaussian(), s, stream).h();
}

std::vector<MomentEstimate> moment_report(const EntryDistribution& d, int max_order, int m, RngStream& stream,
                                          SymmetryClass s, double scale) {
  if (max_order < 1 || max_order > 8) throw DomainError(fmt::format("moment_report: order {} not in [1, 8]", max_order));
  if (m < 10000) throw SampleSizeError(fmt::format("moment_report: need m >= 10^4 draws, got {}", m));

  std::vector<MomentEstimate> out;
  for (int order = 1; order <= max_order; ++order) {
    for (int b = 0; b <= order; ++b) out.push_back({order - b, b, {}, 0.0});
  }
  std::vector<std::complex<long double>> sum(out.size());
  std::vector<long double> sum_sq(out.size(), 0.0L);

  EntryGenerator gen(d);
  for (int k = 0; k < m; ++k) {
    std::complex<double> x;
    if (s == SymmetryClass::symmetric) {
      x = scale * gen(stream.engine);
    } else {
      const double re = gen(stream.engine);
      const double im = gen(stream.engine);
      x = scale * std::complex<double>(re, im) / std::sqrt(2.0);
    }
    for (std::size_t q = 0; q < out.size(); ++q) {
      const std::complex<double> v = std::pow(x, out[q].a) * std::pow(std::conj(x), out[q].b);
      sum[q] += std::complex<long double>(v.real(), v.imag());
      sum_sq[q] += static_cast<long double>(std::norm(v));
    }
  }
  for (std::size_t q = 0; q < out.size(); ++q) {
    const std::complex<long double> mean = sum[q] / static_cast<long double>(m);
    const long double var = (sum_sq[q] / m - std::norm(mean)) * m / (m - 1);
    out[q].value = {static_cast<double>(mean.real()), static_cast<double>(mean.imag())};
    out[q].std_error = std::sqrt(std::max(0.0, static_cast<double>(var)) / m);
  }
  return out;
}

bool moments_match(const std::vector<MomentEstimate>& x, const std::vector<MomentEstimate>& y, int order,
                   double z_threshold) {
  for (const auto& mx : x) {
    if (mx.a + mx.b > order) continue;
    bool found = false;
    for (const auto& my : y) {
      if (my.a != mx.a || my.b != mx.b) continue;
      found = true;
      const double se = std::hypot(mx.std_error, my.std_error);
      if (std::abs(mx.value - my.value) > z_threshold * se + 1e-12) return false;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace rmt
