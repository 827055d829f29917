#include "rmt/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

namespace {

constexpr double kSingular = 1e-14;

double relative(cplx lhs, cplx rhs, std::initializer_list<double> magnitudes) {
  const double diff = std::abs(lhs - rhs);
  if (diff == 0.0) return 0.0;
  double scale = std::numeric_limits<double>::min();
  for (double m : magnitudes) scale = std::max(scale, m);
  return diff / scale;
}

void require_nonsingular(cplx v, const char* what) {
  if (std::abs(v) < kSingular) throw SingularityError(fmt::format("{} is numerically zero ({:.3e})", what, std::abs(v)));
}

}  // namespace

ComplexMatrix SpectralFactor::reconstruct() const {
  if (is_real()) {
    return (real_vectors_ * eigenvalues_.asDiagonal() * real_vectors_.transpose()).cast<cplx>();
  }
  return complex_vectors_ * eigenvalues_.cast<cplx>().asDiagonal() * complex_vectors_.adjoint();
}

SpectralFactor eigen_factor(const HermitianMatrix& h) {
  SpectralFactor f;
  h.visit([&f](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    Eigen::SelfAdjointEigenSolver<M> solver(m, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericError("eigen_factor: eigensolver did not converge");
    f.eigenvalues_ = solver.eigenvalues();
    if constexpr (std::is_same_v<M, RealMatrix>) {
      f.real_vectors_ = solver.eigenvectors();
    } else {
      f.complex_vectors_ = solver.eigenvectors();
    }
  });
  if (!f.eigenvalues_.allFinite()) throw NumericError("eigen_factor: non-finite eigenvalues");
  return f;
}

Green green_at(const SpectralFactor& f, const SpectralPoint& z) {
  const int n = f.n();
  const Eigen::VectorXcd d =
      (f.eigenvalues().cast<cplx>().array() - z.z()).inverse().matrix();
  Green out;
  if (f.is_real()) {
    const auto& u = f.real_vectors();
    const RealMatrix re = u * d.real().asDiagonal() * u.transpose();
    const RealMatrix im = u * d.imag().asDiagonal() * u.transpose();
    out.g.resize(n, n);
    out.g.real() = re;
    out.g.imag() = im;
  } else {
    const auto& u = f.complex_vectors();
    out.g = u * d.asDiagonal() * u.adjoint();
  }
  out.m_n = d.sum() / static_cast<double>(n);
  return out;
}

Green green_at(const WignerSample& s, const SpectralPoint& z) { return green_at(eigen_factor(s), z); }

cplx stieltjes_transform(const Eigen::VectorXd& eigenvalues, const SpectralPoint& z) {
  cplx sum = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) sum += 1.0 / (eigenvalues[k] - z.z());
  return sum / static_cast<double>(eigenvalues.size());
}

int default_log_power(int n) {
  const double ll = std::log(std::log(static_cast<double>(std::max(n, 3))));
  return std::max(1, static_cast<int>(std::ceil(2.0 * ll)));
}

GreenSnapshot control_params(const ComplexMatrix& g, const SpectralPoint& z, int log_power) {
  const Eigen::Index n = g.rows();
  const cplx msc = m_sc(z);
  GreenSnapshot snap;
  snap.z = z;
  snap.m_n = g.diagonal().sum() / static_cast<double>(n);
  double off = 0.0;
  double diag = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == l) {
        diag = std::max(diag, std::abs(g(k, k) - msc));
      } else {
        off = std::max(off, std::norm(g(k, l)));
      }
    }
  }
  snap.lambda_d = diag;
  snap.lambda_o = std::sqrt(off);
  snap.lambda = std::abs(snap.m_n - msc);
  const double nn = static_cast<double>(n);
  snap.psi = std::pow(std::log(nn), log_power) * std::sqrt((snap.lambda + msc.imag()) / (nn * z.eta()));
  snap.ward_residual_max = ward_residual(g, z);
  return snap;
}

MinorSpec::MinorSpec(std::vector<int> removed) : removed_(std::move(removed)) {
  std::sort(removed_.begin(), removed_.end());
  if (!removed_.empty() && removed_.front() < 0) throw DomainError("minor index must be nonnegative");
  if (std::adjacent_find(removed_.begin(), removed_.end()) != removed_.end()) {
    throw DomainError("minor indices must be distinct");
  }
}

bool MinorSpec::contains(int i) const { return std::binary_search(removed_.begin(), removed_.end(), i); }

MinorSpec MinorSpec::with(int i) const {
  if (contains(i)) return *this;
  auto r = removed_;
  r.push_back(i);
  return MinorSpec(std::move(r));
}

MinorSpec MinorSpec::with(int i, int j) const { return with(i).with(j); }

std::vector<int> MinorSpec::kept(int n) const {
  if (!removed_.empty() && removed_.back() >= n) {
    throw DimensionError(fmt::format("minor index {} out of range for N={}", removed_.back(), n));
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n) - removed_.size());
  for (int i = 0; i < n; ++i) {
    if (!contains(i)) out.push_back(i);
  }
  return out;
}

cplx MinorGreen::operator()(int i, int j) const {
  const int pi = position.at(static_cast<std::size_t>(i));
  const int pj = position.at(static_cast<std::size_t>(j));
  if (pi < 0 || pj < 0) throw DomainError(fmt::format("index ({}, {}) was removed from the minor", i, j));
  return g(pi, pj);
}

HermitianMatrix minor_matrix(const HermitianMatrix& h, const MinorSpec& t) {
  const std::vector<int> keep = t.kept(h.n());
  return h.visit([&keep](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    const auto sz = static_cast<Eigen::Index>(keep.size());
    M out(sz, sz);
    for (Eigen::Index c = 0; c < sz; ++c) {
      for (Eigen::Index r = 0; r < sz; ++r) out(r, c) = m(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
    }
    return HermitianMatrix(std::move(out));
  });
}

MinorGreen minor_green(const HermitianMatrix& h, const MinorSpec& t, const SpectralPoint& z) {
  const int n = h.n();
  MinorGreen out;
  out.kept = t.kept(n);
  if (out.kept.empty()) throw DimensionError("minor_green: every index removed");
  out.position.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t p = 0; p < out.kept.size(); ++p) out.position[static_cast<std::size_t>(out.kept[p])] = static_cast<int>(p);
  out.g = green_at(eigen_factor(minor_matrix(h, t)), z).g;
  return out;
}

KQuantity k_quantity(const HermitianMatrix& h, const MinorSpec& t, int i, int j, const SpectralPoint& z) {
  const int n = h.n();
  if (i < 0 || j < 0 || i >= n || j >= n) throw DimensionError(fmt::format("k_quantity: index out of range for N={}", n));
  if (t.contains(i) || t.contains(j)) throw DomainError(fmt::format("k_quantity: ({}, {}) must not belong to the base set", i, j));

  const MinorSpec removed = t.with(i, j);
  KQuantity out;
  out.z_value = 0.0;
  if (removed.size() < static_cast<std::size_t>(n)) {
    const MinorGreen gm = minor_green(h, removed, z);
    const auto m = static_cast<Eigen::Index>(gm.kept.size());
    Eigen::VectorXcd ai(m), aj(m);
    for (Eigen::Index p = 0; p < m; ++p) {
      ai[p] = h(gm.kept[static_cast<std::size_t>(p)], i);
      aj[p] = h(gm.kept[static_cast<std::size_t>(p)], j);
    }
    // adjoint() conjugates a^i
    out.z_value = (ai.adjoint() * gm.g * aj)(0, 0);
  }
  out.k_value = h(i, j) - (i == j ? z.z() : cplx(0.0)) - out.z_value;
  return out;
}

XiQuantities xi_quantities(const WignerSample& s, const ComplexMatrix& g, int i, const SpectralPoint& z) {
  const int n = s.n();
  if (i < 0 || i >= n) throw DimensionError(fmt::format("xi_quantities: index {} out of range", i));
  const auto& var = s.profile().sigma2();
  const cplx gii = g(i, i);
  require_nonsingular(gii, "G_ii");

  XiQuantities out;
  out.a = var(i, i) * gii;
  for (int j = 0; j < n; ++j) {
    if (j != i) out.a += var(i, j) * g(i, j) * g(j, i) / gii;
  }

  const KQuantity kq = k_quantity(s.h(), MinorSpec{}, i, i, z);
  out.partial_expectation = 0.0;
  if (n > 1) {
    const MinorGreen gi = minor_green(s.h(), MinorSpec({i}), z);
    for (int k : gi.kept) out.partial_expectation += var(k, i) * gi(k, k);
  }
  out.z = kq.z_value - out.partial_expectation;
  out.upsilon = out.a + s.h()(i, i) - out.z;
  return out;
}

XiQuantities xi_quantities(const WignerSample& s, int i, const SpectralPoint& z) {
  return xi_quantities(s, green_at(s, z).g, i, z);
}

cplx average_z(const WignerSample& s, const SpectralPoint& z) {
  const ComplexMatrix g = green_at(s, z).g;
  cplx sum = 0.0;
  for (int i = 0; i < s.n(); ++i) sum += xi_quantities(s, g, i, z).z;
  return sum / static_cast<double>(s.n());
}

cplx self_consistent_residual(const WignerSample& s, const ComplexMatrix& g, int i, const SpectralPoint& z) {
  const cplx msc = m_sc(z);
  const auto& var = s.profile().sigma2();
  cplx coupling = 0.0;
  for (int j = 0; j < s.n(); ++j) coupling += var(i, j) * (g(j, j) - msc);
  const XiQuantities xi = xi_quantities(s, g, i, z);
  const cplx vi = g(i, i) - msc;
  return vi - (1.0 / (-z.z() - msc - (coupling - xi.upsilon)) - msc);
}

double IdentityResiduals::max() const {
  return std::max({diagonal_inverse, off_diagonal, diagonal_update, entry_update});
}

IdentityResiduals identity_residuals(const HermitianMatrix& h, const SpectralPoint& z, const MinorSpec& t, int i, int j,
                                     int k) {
  if (i == j || j == k || i == k) throw DomainError("identity_residuals: i, j, k must be distinct");
  for (int idx : {i, j, k}) {
    if (t.contains(idx)) throw DomainError(fmt::format("identity_residuals: index {} belongs to T", idx));
  }
  const MinorGreen g = minor_green(h, t, z);
  const MinorGreen g_j = minor_green(h, t.with(j), z);
  const MinorGreen g_i = minor_green(h, t.with(i), z);
  const MinorGreen g_k = minor_green(h, t.with(k), z);

  IdentityResiduals r;

  const cplx k_ii = k_quantity(h, t, i, i, z).k_value;
  r.diagonal_inverse = relative(g(i, i) * k_ii, 1.0, {1.0});

  const cplx k_ij = k_quantity(h, t, i, j, z).k_value;
  const cplx form1 = -g(j, j) * g_j(i, i) * k_ij;
  const cplx form2 = -g(i, i) * g_i(j, j) * k_ij;
  r.off_diagonal = std::max(relative(g(i, j), form1, {std::abs(g(i, j)), std::abs(form1)}),
                            relative(g(i, j), form2, {std::abs(g(i, j)), std::abs(form2)}));

  require_nonsingular(g(j, j), "G_jj");
  const cplx upd = g(i, j) * g(j, i) / g(j, j);
  r.diagonal_update = relative(g(i, i) - g_j(i, i), upd, {std::abs(g(i, i)), std::abs(g_j(i, i)), std::abs(upd)});

  require_nonsingular(g(k, k), "G_kk");
  const cplx upd2 = g(i, k) * g(k, j) / g(k, k);
  r.entry_update = relative(g(i, j) - g_k(i, j), upd2, {std::abs(g(i, j)), std::abs(g_k(i, j)), std::abs(upd2)});
  return r;
}

double ward_residual(const ComplexMatrix& g, const SpectralPoint& z) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    const double lhs = g.row(k).squaredNorm();
    worst = std::max(worst, std::abs(lhs - g(k, k).imag() / z.eta()));
  }
  return worst;
}

double ward_residual_relative(const ComplexMatrix& g, const SpectralPoint& z) {
  double scale = std::numeric_limits<double>::min();
  for (Eigen::Index k = 0; k < g.rows(); ++k) scale = std::max(scale, g(k, k).imag() / z.eta());
  return ward_residual(g, z) / scale;
}

}  // namespace rmt
