#include "rmt/semicircle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

SpectralPoint::SpectralPoint(double energy, double eta) : energy_(energy), eta_(eta) {
  if (!std::isfinite(energy) || !std::isfinite(eta) || !(eta > 0.0)) {
    throw DomainError(fmt::format("spectral point needs finite E and eta > 0, got E={} eta={}", energy, eta));
  }
}

double SpectralPoint::kappa() const { return std::abs(std::abs(energy_) - 2.0); }

double s_l_eta_floor(int n, double l_param) {
  const double logn = std::log(static_cast<double>(n));
  return std::pow(logn, 10.0 * l_param) / n;
}

bool in_s_l(const SpectralPoint& z, int n, double l_param) {
  return std::abs(z.energy()) <= 5.0 && z.eta() <= 10.0 && z.eta() > s_l_eta_floor(n, l_param);
}

SpectralGrid make_grid(int n, double l_param, const std::vector<double>& energies, const std::vector<double>& etas) {
  SpectralGrid grid;
  grid.n = n;
  grid.l_param = l_param;
  for (double e : energies) {
    for (double eta : etas) {
      if (!(eta > 0.0)) throw ConfigError(fmt::format("grid eta {} is not positive", eta));
      SpectralPoint z(e, eta);
      if (!in_s_l(z, n, l_param)) {
        throw ConfigError(fmt::format("grid point E={} eta={} lies outside S_L (N={}, L={}, eta floor {:.4g})", e, eta, n,
                                      l_param, s_l_eta_floor(n, l_param)));
      }
      grid.points.push_back(z);
    }
  }
  return grid;
}

double max_l_param(int n, const std::vector<double>& etas) {
  if (n < 3) throw ConfigError(fmt::format("S_L needs N >= 3, got {}", n));
  if (etas.empty()) throw ConfigError("empty eta list");
  const double eta_min = *std::min_element(etas.begin(), etas.end());
  const double scaled = n * eta_min;
  if (!(scaled > 1.0)) {
    throw ConfigError(fmt::format("eta {} <= 1/N: no S_L contains it for N={}", eta_min, n));
  }
  const double l = std::log(scaled) / (10.0 * std::log(std::log(static_cast<double>(n))));
  return l * (1.0 - 1e-9);
}

cplx m_sc(const SpectralPoint& point) {
  const cplx z = point.z();
  // sqrt(z-2) sqrt(z+2) behaves like z at infinity with its cut on [-2, 2].
  const cplx s = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
  // The two roots multiply to one; compute the large one without
  // cancellation and invert it.
  const cplx big = (-z - s) / 2.0;
  const cplx small = 1.0 / big;
  cplx m = small;
  if (!(small.imag() > 0.0) && big.imag() > small.imag()) m = big;
  if (!(m.imag() > 0.0)) {
    // Only reachable through underflow of Im m far from the support.
    m = std::abs(small) <= 1.0 ? small : big;
  }
  const double residual = std::abs(m + 1.0 / (z + m));
  if (!(residual <= 1e-10 * std::max(1.0, std::abs(z)))) {
    throw NumericError(fmt::format("m_sc: self-consistency residual {} at z={}+{}i", residual, z.real(), z.imag()));
  }
  return m;
}

double rho_sc(double e) {
  const double d = 4.0 - e * e;
  return d > 0.0 ? std::sqrt(d) / (2.0 * std::numbers::pi) : 0.0;
}

double n_sc(double e) {
  if (e <= -2.0) return 0.0;
  if (e >= 2.0) return 1.0;
  return 0.5 + e * std::sqrt(4.0 - e * e) / (4.0 * std::numbers::pi) + std::asin(e / 2.0) / std::numbers::pi;
}

std::vector<double> classical_locations(int n) {
  if (n < 1) throw DimensionError(fmt::format("classical_locations: n must be >= 1, got {}", n));
  std::vector<double> gamma(static_cast<std::size_t>(n));
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
  for (int j = 1; j < n; ++j) {
    const double target = static_cast<double>(j) / n;
    auto f = [target](double x) { return n_sc(x) - target; };
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, -2.0, 2.0, -target, 1.0 - target, tol, iters);
    const double mid = 0.5 * (lo + hi);
    // The bracket may collapse onto either endpoint; keep the better one.
    double best = mid;
    for (double c : {lo, hi}) {
      if (std::abs(f(c)) < std::abs(f(best))) best = c;
    }
    gamma[static_cast<std::size_t>(j - 1)] = best;
  }
  gamma.back() = 2.0;
  return gamma;
}

double im_msc_scale(const SpectralPoint& z) {
  const double e = z.energy();
  const double eta = z.eta();
  if (std::abs(e) > 5.0 || eta > 10.0) {
    throw DomainError(fmt::format("im_msc_scale: (E={}, eta={}) outside |E|<=5, 0<eta<=10", e, eta));
  }
  const double kappa = z.kappa();
  if (kappa >= eta && std::abs(e) >= 2.0) return eta / std::sqrt(kappa + eta);
  return std::sqrt(kappa + eta);
}

}  // namespace rmt
