#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rmt {

enum class ProfileKind { flat, band, custom };

std::string to_string(ProfileKind kind);

/// Variance matrix B = (sigma^2_ij) of a generalized Wigner ensemble.
///
/// Instances are immutable once built and always satisfy: symmetry,
/// column sums equal to one (to 1e-12 for the flat/band constructors and to
/// 1e-10 for custom input), and max N * sigma^2_ij <= c0.
class VarianceProfile {
 public:
  int n() const { return static_cast<int>(sigma2_.rows()); }
  const Eigen::MatrixXd& sigma2() const { return sigma2_; }
  double sigma2(int i, int j) const { return sigma2_(i, j); }
  ProfileKind kind() const { return kind_; }
  // Upper bound on N * sigma^2_ij.
  double c0() const { return c0_; }
  // FNV-1a over the dimension and the raw variance bytes; used as provenance.
  std::uint64_t hash() const { return hash_; }
  std::string description() const { return description_; }

 private:
  friend VarianceProfile make_profile(Eigen::MatrixXd sigma2, ProfileKind kind, std::string description);
  VarianceProfile() = default;

  Eigen::MatrixXd sigma2_;
  ProfileKind kind_ = ProfileKind::custom;
  double c0_ = 0.0;
  std::uint64_t hash_ = 0;
  std::string description_;
};

// Internal factory shared by the constructors below. Does not validate.
VarianceProfile make_profile(Eigen::MatrixXd sigma2, ProfileKind kind, std::string description);

/// Standard Wigner profile, sigma^2_ij = 1/n.
VarianceProfile flat_profile(int n);

/// Shape function f of a band profile; must be even and nonnegative.
using BandShape = std::function<double(double)>;

/// f(x) = 1/2 on |x| <= 1, zero elsewhere.
BandShape indicator_shape();
/// f(x) = (1 - |x|)_+.
BandShape triangle_shape();
/// Resolves "indicator" / "triangle"; throws ConfigError otherwise.
BandShape shape_by_name(const std::string& name);

/// Circulant band profile with raw entries w^{-1} f([i-j]_n / w), rescaled by
/// the common row sum so the result is exactly doubly stochastic.
VarianceProfile band_profile(int n, int w, const BandShape& f, const std::string& shape_name = "custom");

/// Symmetrizes (B + B^T)/2 and validates nonnegativity and unit column sums
/// within 1e-10. Throws ValidationError naming the offending column.
VarianceProfile custom_profile(const Eigen::MatrixXd& sigma2);

struct AssumptionReport {
  double row_sum_residual = 0.0;
  std::vector<double> spectrum_of_b;  // ascending
  double delta_minus = 0.0;
  double delta_plus = 0.0;
  bool eigenvalue_one_simple = false;
  double c_inf = 0.0;
  double c_sup = 0.0;
};

/// Spectral check of B. Spec(B) \ {1} lies in [-1 + delta_minus, 1 - delta_plus].
/// Eigenvalue one is "simple" when exactly one eigenvalue is within 1e-8 of it.
/// Always produces a report; the flags carry the verdict.
AssumptionReport assumption_report(const VarianceProfile& p);

// Plain-text matrix format: one row per line, space separated decimals.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);
Eigen::MatrixXd read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace rmt
