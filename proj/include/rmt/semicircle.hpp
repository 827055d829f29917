#pragma once

#include <complex>
#include <vector>

namespace rmt {

using cplx = std::complex<double>;

/// Spectral parameter z = E + i eta in the upper half plane.
class SpectralPoint {
 public:
  /// Throws DomainError unless eta > 0 and both components are finite.
  SpectralPoint(double energy, double eta);

  double energy() const { return energy_; }
  double eta() const { return eta_; }
  // Distance to the nearest spectral edge, | |E| - 2 |.
  double kappa() const;
  cplx z() const { return {energy_, eta_}; }

 private:
  double energy_;
  double eta_;
};

/// A finite set of spectral points inside the domain
///   S_L = { |E| <= 5, N^{-1} (log N)^{10 L} < eta <= 10 }.
struct SpectralGrid {
  int n = 0;
  double l_param = 0.0;
  std::vector<SpectralPoint> points;
};

// Lower eta boundary of S_L for dimension n.
double s_l_eta_floor(int n, double l_param);
bool in_s_l(const SpectralPoint& z, int n, double l_param);

/// Cartesian grid energies x etas; throws ConfigError if any point lies
/// outside S_L for the given n.
SpectralGrid make_grid(int n, double l_param, const std::vector<double>& energies, const std::vector<double>& etas);

/// Largest L for which every eta in `etas` satisfies eta > N^{-1}(log N)^{10L}.
/// Throws ConfigError when some eta <= 1/N (no nonnegative L works).
double max_l_param(int n, const std::vector<double>& etas);

/// Stieltjes transform of the semicircle law, the root of m^2 + z m + 1 = 0
/// with Im m > 0.
cplx m_sc(const SpectralPoint& z);

/// Semicircle density (2 pi)^{-1} sqrt((4 - E^2)_+).
double rho_sc(double e);

/// Semicircle distribution function, closed form.
double n_sc(double e);

/// gamma_1 < ... < gamma_n with n_sc(gamma_j) = j/n; gamma_n is exactly 2.
std::vector<double> classical_locations(int n);

/// Reference size of Im m_sc: eta / sqrt(kappa + eta) outside the spectrum
/// (kappa >= eta, |E| >= 2), sqrt(kappa + eta) otherwise. Comparable to
/// Im m_sc up to a universal constant. Domain |E| <= 5, 0 < eta <= 10.
double im_msc_scale(const SpectralPoint& z);

}  // namespace rmt
