#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rmt/profile.hpp"

namespace rmt {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

enum class SymmetryClass { symmetric, hermitian };

std::string to_string(SymmetryClass s);
SymmetryClass symmetry_from_string(const std::string& name);

enum class Law { gaussian, rademacher, uniform, two_point };

/// Standardized (mean 0, variance 1) real entry law. The two-point law takes
/// raw values a (probability p) and b (probability 1-p) and is affinely
/// standardized internally.
class EntryDistribution {
 public:
  static EntryDistribution gaussian();
  static EntryDistribution rademacher();
  static EntryDistribution uniform();
  static EntryDistribution two_point(double a, double b, double p);
  /// "gaussian", "rademacher", "uniform" or "two_point:a,b,p".
  static EntryDistribution parse(const std::string& spec);

  Law law() const { return law_; }
  // Sub-exponential decay parameter; informational only.
  double theta() const { return theta_; }
  std::string name() const;

  template <class Engine>
  double draw(Engine& eng) const;

  /// Analytic E x^k of the standardized law.
  double moment(int k) const;

  double two_point_p() const { return p_; }
  double two_point_value(bool first) const { return first ? value_a_ : value_b_; }

 private:
  EntryDistribution(Law law, double theta) : law_(law), theta_(theta) {}
  Law law_;
  double theta_;
  // standardized two-point support; P(x = value_a_) = p_
  double value_a_ = 0.0, value_b_ = 0.0, p_ = 0.5;
  double raw_a_ = 0.0, raw_b_ = 0.0;
};

/// Per-sample random stream. mt19937_64 is fully specified by the standard,
/// so a stream is reproducible across runs and platforms.
struct RngStream {
  std::mt19937_64 engine;
};

/// Deterministic stream for (master_seed, sample_index); distinct indices give
/// independent streams irrespective of the order they are consumed in.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index);

/// Sample index in an independent family of streams: `slot` selects the
/// family (ensemble, time point, ...), `sample` the member.
constexpr std::uint64_t stream_index(std::uint32_t slot, std::uint32_t sample) {
  return (static_cast<std::uint64_t>(slot) << 32) | sample;
}

/// Hermitian (complex) or real symmetric dense matrix.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(RealMatrix m) : data_(std::move(m)) {}
  explicit HermitianMatrix(ComplexMatrix m) : data_(std::move(m)) {}

  bool is_real() const { return std::holds_alternative<RealMatrix>(data_); }
  SymmetryClass symmetry() const { return is_real() ? SymmetryClass::symmetric : SymmetryClass::hermitian; }
  int n() const;
  const RealMatrix& real() const { return std::get<RealMatrix>(data_); }
  const ComplexMatrix& complex() const { return std::get<ComplexMatrix>(data_); }
  ComplexMatrix to_complex() const;
  std::complex<double> operator()(int i, int j) const;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), data_);
  }

  // max |h_ij - conj(h_ji)|
  double hermiticity_defect() const;

 private:
  std::variant<RealMatrix, ComplexMatrix> data_;
};

/// Ascending eigenvalues; throws NumericError if the solver fails.
Eigen::VectorXd eigenvalues_of(const HermitianMatrix& h);

struct Provenance {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
  std::string distribution;
  std::uint64_t profile_hash = 0;
};

/// One realization H of a generalized Wigner ensemble. Eigenvalues are
/// computed on first request and cached; the cache is thread safe and shared
/// between copies.
class WignerSample {
 public:
  WignerSample(HermitianMatrix h, std::shared_ptr<const VarianceProfile> profile, Provenance provenance);

  const HermitianMatrix& h() const { return h_; }
  int n() const { return h_.n(); }
  SymmetryClass symmetry() const { return h_.symmetry(); }
  const VarianceProfile& profile() const { return *profile_; }
  const std::shared_ptr<const VarianceProfile>& profile_ptr() const { return profile_; }
  const Provenance& provenance() const { return provenance_; }

  /// Sorted ascending.
  const Eigen::VectorXd& eigenvalues() const;

 private:
  struct Cache {
    std::once_flag once;
    Eigen::VectorXd values;
  };
  HermitianMatrix h_;
  std::shared_ptr<const VarianceProfile> profile_;
  Provenance provenance_;
  std::shared_ptr<Cache> cache_;
};

/// Independent entries h_ij (i <= j) with E h_ij = 0 and E|h_ij|^2 = sigma^2_ij,
/// mirrored to make H exactly Hermitian. Hermitian off-diagonal entries are
/// sigma (x + i y)/sqrt(2) with x, y iid from d; diagonals are real.
WignerSample sample_matrix(std::shared_ptr<const VarianceProfile> profile, const EntryDistribution& d, SymmetryClass s,
                           RngStream& stream, Provenance provenance = {});

/// GOE/GUE matrix with every entry of variance 1/n (flat Gaussian profile).
HermitianMatrix gaussian_ensemble(int n, SymmetryClass s, RngStream& stream);

struct MomentEstimate {
  int a = 0;  // power of x
  int b = 0;  // power of conj(x)
  std::complex<double> value;
  double std_error = 0.0;
};

/// Empirical E x^a conj(x)^b for a + b <= max_order from m draws. For the
/// symmetric class x is a real draw; for the hermitian class x is the
/// off-diagonal variable (x1 + i x2)/sqrt(2). `scale` multiplies x first.
/// Requires max_order <= 8 and m >= 10^4.
std::vector<MomentEstimate> moment_report(const EntryDistribution& d, int max_order, int m, RngStream& stream,
                                          SymmetryClass s = SymmetryClass::symmetric, double scale = 1.0);

/// True when every moment of order <= order agrees within z_threshold
/// combined standard errors (plus 1e-12 absolute slack for exact moments).
bool moments_match(const std::vector<MomentEstimate>& x, const std::vector<MomentEstimate>& y, int order,
                   double z_threshold = 4.0);

// ---------------------------------------------------------------------------

/// Stateful drawer for one law; keeps the Gaussian pair cache across draws so
/// bulk sampling costs one normal per entry.
class EntryGenerator {
 public:
  explicit EntryGenerator(const EntryDistribution& d) : d_(d) {}

  template <class Engine>
  double operator()(Engine& eng) {
    switch (d_.law()) {
      case Law::gaussian:
        return normal_(eng);
      case Law::rademacher:
        return coin_(eng) ? 1.0 : -1.0;
      case Law::uniform:
        return uniform_(eng);
      case Law::two_point:
        return d_.two_point_value(bernoulli_(eng));
    }
    return 0.0;
  }

 private:
  EntryDistribution d_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::bernoulli_distribution coin_{0.5};
  std::uniform_real_distribution<double> uniform_{-1.7320508075688772, 1.7320508075688772};
  std::bernoulli_distribution bernoulli_{d_.two_point_p()};
};

template <class Engine>
double EntryDistribution::draw(Engine& eng) const {
  EntryGenerator g(*this);
  return g(eng);
}

}  // namespace rmt
