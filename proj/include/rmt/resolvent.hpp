#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rmt/sampler.hpp"
#include "rmt/semicircle.hpp"

namespace rmt {

/// Eigendecomposition H = U diag(lambda) U* computed once; resolvents at any
/// spectral point are then assembled from it. Read-only after construction,
/// so one factor can serve several threads.
class SpectralFactor {
 public:
  int n() const { return static_cast<int>(eigenvalues_.size()); }
  bool is_real() const { return real_vectors_.size() > 0 || complex_vectors_.size() == 0; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const RealMatrix& real_vectors() const { return real_vectors_; }
  const ComplexMatrix& complex_vectors() const { return complex_vectors_; }
  // U diag(lambda) U*
  ComplexMatrix reconstruct() const;

 private:
  friend SpectralFactor eigen_factor(const HermitianMatrix& h);
  Eigen::VectorXd eigenvalues_;
  RealMatrix real_vectors_;
  ComplexMatrix complex_vectors_;
};

/// Throws NumericError if the eigensolver fails or returns non-finite values.
SpectralFactor eigen_factor(const HermitianMatrix& h);
inline SpectralFactor eigen_factor(const WignerSample& s) { return eigen_factor(s.h()); }

struct Green {
  ComplexMatrix g;
  cplx m_n;  // N^{-1} tr G
};

/// G(z) = (H - z)^{-1} from the spectral factorization.
Green green_at(const SpectralFactor& f, const SpectralPoint& z);
Green green_at(const WignerSample& s, const SpectralPoint& z);

/// Stieltjes transform of the empirical spectral measure, N^{-1} sum 1/(lambda - z).
cplx stieltjes_transform(const Eigen::VectorXd& eigenvalues, const SpectralPoint& z);

struct GreenSnapshot {
  SpectralPoint z{0.0, 1.0};
  cplx m_n;
  double lambda_d = 0.0;  // max_k |G_kk - m_sc|
  double lambda_o = 0.0;  // max_{k != l} |G_kl|
  double lambda = 0.0;    // |m_N - m_sc|
  double psi = 0.0;
  double ward_residual_max = 0.0;
};

/// ceil(2 log log N), the default power of log N in the control parameter Psi.
int default_log_power(int n);

/// Deviation of G from the semicircle prediction, and
///   Psi = (log N)^l sqrt((Lambda + Im m_sc) / (N eta)).
GreenSnapshot control_params(const ComplexMatrix& g, const SpectralPoint& z, int log_power);

/// Sorted set of removed indices (0-based).
class MinorSpec {
 public:
  MinorSpec() = default;
  /// Throws DomainError on negative or repeated indices.
  explicit MinorSpec(std::vector<int> removed);

  const std::vector<int>& removed() const { return removed_; }
  std::size_t size() const { return removed_.size(); }
  bool contains(int i) const;
  MinorSpec with(int i) const;
  MinorSpec with(int i, int j) const;
  /// Kept indices in increasing order; DimensionError if an index is >= n.
  std::vector<int> kept(int n) const;

 private:
  std::vector<int> removed_;
};

/// Resolvent of a minor, addressable by the original indices.
struct MinorGreen {
  ComplexMatrix g;
  std::vector<int> kept;
  std::vector<int> position;  // original index -> row of g, or -1 if removed

  cplx operator()(int i, int j) const;
};

HermitianMatrix minor_matrix(const HermitianMatrix& h, const MinorSpec& t);

/// Resolvent of H with the rows and columns in t deleted, freshly factorized.
/// DimensionError when t removes every index.
MinorGreen minor_green(const HermitianMatrix& h, const MinorSpec& t, const SpectralPoint& z);

struct KQuantity {
  cplx z_value;  // Z = sum_{k,l} conj(a^i_k) G_kl a^j_l
  cplx k_value;  // K = h_ij - z delta_ij - Z
};

/// Z and K for the minor obtained by removing t together with i and j, i.e.
/// K^{(i t)}_{ii} when i == j and K^{(i j t)}_{ij} otherwise. The vectors a^i,
/// a^j are columns i, j of H restricted to the surviving indices.
/// DomainError if i or j belongs to t.
KQuantity k_quantity(const HermitianMatrix& h, const MinorSpec& t, int i, int j, const SpectralPoint& z);

struct XiQuantities {
  cplx a;        // A_i
  cplx z;        // Z_i, fluctuation of Z^{(i)}_{ii} about its partial expectation
  cplx upsilon;  // A_i + h_ii - Z_i
  cplx partial_expectation;  // E_{a^i} Z^{(i)}_{ii} = sum_{k != i} sigma^2_ki G^{(i)}_kk
};

/// Partial expectations are evaluated exactly from the variance profile.
/// SingularityError if |G_ii| < 1e-14.
XiQuantities xi_quantities(const WignerSample& s, int i, const SpectralPoint& z);
XiQuantities xi_quantities(const WignerSample& s, const ComplexMatrix& g, int i, const SpectralPoint& z);

/// [Z] = N^{-1} sum_i Z_i.
cplx average_z(const WignerSample& s, const SpectralPoint& z);

/// Residual of the self-consistent equation for v_i = G_ii - m_sc:
///   v_i - (1/(-z - m_sc - (sum_j sigma^2_ij v_j - Upsilon_i)) - m_sc).
cplx self_consistent_residual(const WignerSample& s, const ComplexMatrix& g, int i, const SpectralPoint& z);

/// Relative residuals of the four perturbation identities for resolvent
/// minors. Each is |lhs - rhs| divided by the largest magnitude among the
/// terms that enter the identity.
struct IdentityResiduals {
  double diagonal_inverse = 0.0;  // G^(T)_ii K^(iT)_ii = 1
  double off_diagonal = 0.0;      // G^(T)_ij = -G^(T)_jj G^(jT)_ii K^(ijT)_ij (both orderings)
  double diagonal_update = 0.0;   // G^(T)_ii - G^(jT)_ii = G^(T)_ij G^(T)_ji / G^(T)_jj
  double entry_update = 0.0;      // G^(T)_ij - G^(kT)_ij = G^(T)_ik G^(T)_kj / G^(T)_kk
  double max() const;
};

/// i, j, k distinct and outside t. SingularityError on a vanishing denominator.
IdentityResiduals identity_residuals(const HermitianMatrix& h, const SpectralPoint& z, const MinorSpec& t, int i, int j,
                                     int k);

/// max_k | sum_l |G_kl|^2 - Im G_kk / eta |.
double ward_residual(const ComplexMatrix& g, const SpectralPoint& z);
/// ward_residual divided by max_k Im G_kk / eta.
double ward_residual_relative(const ComplexMatrix& g, const SpectralPoint& z);

}  // namespace rmt
