#include "rmt/dbm.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rmt/errors.hpp"
#include "rmt/parallel.hpp"
#include "rmt/semicircle.hpp"

namespace rmt {

namespace {

HermitianMatrix combine(const HermitianMatrix& h, double a, const HermitianMatrix& noise, double b) {
  if (h.n() != noise.n() || h.is_real() != noise.is_real()) {
    throw DimensionError("flow step: matrix and noise differ in size or symmetry class");
  }
  if (h.is_real()) return HermitianMatrix(RealMatrix(a * h.real() + b * noise.real()));
  return HermitianMatrix(ComplexMatrix(a * h.complex() + b * noise.complex()));
}

double z_score(const MeanSe& m) {
  if (m.std_error > 0.0) return m.mean / m.std_error;
  return m.mean == 0.0 ? 0.0 : std::copysign(INFINITY, m.mean);
}

}  // namespace

double expected_variance(double sigma2_0, double t, int n) {
  const double decay = std::exp(-t);
  return decay * sigma2_0 + (1.0 - decay) / n;
}

HermitianMatrix ou_step(const HermitianMatrix& h, double dt, const HermitianMatrix& noise) {
  if (dt < 0.0) throw DomainError(fmt::format("ou_step: negative time step {}", dt));
  return combine(h, std::exp(-dt / 2.0), noise, std::sqrt(-std::expm1(-dt)));
}

HermitianMatrix euler_step(const HermitianMatrix& h, double dt, const HermitianMatrix& noise) {
  if (dt < 0.0) throw DomainError(fmt::format("euler_step: negative time step {}", dt));
  return combine(h, 1.0 - dt / 2.0, noise, std::sqrt(dt));
}

HermitianMatrix ou_endpoint(const HermitianMatrix& h0, double t, RngStream& stream) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("ou_endpoint: time must be >= 0, got {}", t));
  if (t == 0.0) return h0;
  return ou_step(h0, t, gaussian_ensemble(h0.n(), h0.symmetry(), stream));
}

std::vector<FlowState> ou_path(const WignerSample& h0, std::span<const double> t_grid, RngStream& stream, PathMode mode) {
  if (t_grid.empty() || t_grid.front() != 0.0) throw DomainError("ou_path: time grid must start at 0");
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) throw DomainError(fmt::format("ou_path: time grid not increasing at position {}", k));
  }
  std::vector<FlowState> path;
  path.reserve(t_grid.size());
  path.push_back({0.0, h0.h(), h0.profile_ptr(), mode});
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double dt = t_grid[k] - t_grid[k - 1];
    const HermitianMatrix noise = gaussian_ensemble(h0.n(), h0.symmetry(), stream);
    const HermitianMatrix& prev = path.back().h;
    HermitianMatrix next = mode == PathMode::exact_ou ? ou_step(prev, dt, noise) : euler_step(prev, dt, noise);
    path.push_back({t_grid[k], std::move(next), h0.profile_ptr(), mode});
  }
  return path;
}

HermitianMatrix rigid_start(int n, SymmetryClass s) {
  const std::vector<double> gamma = classical_locations(n);
  const Eigen::Map<const Eigen::VectorXd> g(gamma.data(), n);
  if (s == SymmetryClass::symmetric) return HermitianMatrix(RealMatrix(g.asDiagonal()));
  return HermitianMatrix(ComplexMatrix(g.cast<cplx>().asDiagonal()));
}

GapSample gap_distribution(std::span<const double> eigs, GapWindow window, std::size_t min_in_window) {
  const double n = static_cast<double>(eigs.size());
  GapSample out;
  out.window = window;
  std::size_t inside = 0;
  for (std::size_t j = 0; j < eigs.size(); ++j) {
    if (std::abs(eigs[j] - window.center) > window.half_width) continue;
    ++inside;
    if (j + 1 < eigs.size()) out.gaps.push_back((eigs[j + 1] - eigs[j]) * n * rho_sc(eigs[j]));
  }
  if (inside < min_in_window) {
    throw SampleSizeError(fmt::format("gap_distribution: {} eigenvalues in window [{}, {}], need {}", inside,
                                      window.center - window.half_width, window.center + window.half_width,
                                      min_in_window));
  }
  return out;
}

bool VarianceCheck::within(double z_limit) const {
  return std::abs(z_offdiag) <= z_limit && std::abs(z_diag) <= z_limit;
}

VarianceCheck variance_interpolation(const RealMatrix& initial_second_moment, double t,
                                     std::span<const HermitianMatrix> samples) {
  VarianceCheck out;
  out.t = t;
  std::vector<double> off, diag;
  for (const auto& h : samples) {
    const int n = h.n();
    if (initial_second_moment.rows() != n) throw DimensionError("variance_interpolation: size mismatch");
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        const double r = n * (std::norm(h(i, j)) - expected_variance(initial_second_moment(i, j), t, n));
        (i == j ? diag : off).push_back(r);
      }
    }
  }
  out.offdiag_residual = mean_se(off);
  out.diag_residual = mean_se(diag);
  out.z_offdiag = z_score(out.offdiag_residual);
  out.z_diag = z_score(out.diag_residual);
  return out;
}

std::vector<RelaxationPoint> relaxation_curve(const InitialFactory& h0_factory, std::span<const double> t_list,
                                              std::span<const double> reference_gaps, const RelaxationOptions& options) {
  if (options.samples < 1) throw SampleSizeError("relaxation_curve: need at least one sample per time");
  const auto samples = static_cast<std::size_t>(options.samples);
  RealMatrix second_moment;
  if (options.initial_second_moment) {
    second_moment = options.initial_second_moment();
  } else {
    second_moment = h0_factory(0).visit([](const auto& m) { return RealMatrix(m.cwiseAbs2()); });
  }

  std::vector<RelaxationPoint> curve;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    const double t = t_list[ti];
    RelaxationPoint point;
    point.t = t;
    point.gaps_per_sample.resize(samples);
    std::vector<HermitianMatrix> endpoints(samples);
    parallel_for(samples, options.threads, [&](std::size_t s) {
      RngStream stream = derive_stream(options.seed, stream_index(static_cast<std::uint32_t>(ti + 1), static_cast<std::uint32_t>(s)));
      endpoints[s] = ou_endpoint(h0_factory(s), t, stream);
      const Eigen::VectorXd ev = eigenvalues_of(endpoints[s]);
      point.gaps_per_sample[s] = gap_distribution({ev.data(), static_cast<std::size_t>(ev.size())}, options.window).gaps;
    });
    std::vector<double> pooled;
    for (const auto& g : point.gaps_per_sample) pooled.insert(pooled.end(), g.begin(), g.end());
    point.n_gaps = pooled.size();
    point.ks = ks_two_sample(pooled, reference_gaps);
    point.variance = variance_interpolation(second_moment, t, endpoints);
    curve.push_back(std::move(point));
  }
  return curve;
}

std::vector<double> equilibrium_gaps(int n, SymmetryClass s, int samples, GapWindow window, std::uint64_t seed,
                                     unsigned threads) {
  std::vector<std::vector<double>> per(static_cast<std::size_t>(samples));
  parallel_for(per.size(), threads, [&](std::size_t k) {
    RngStream stream = derive_stream(seed, stream_index(0, static_cast<std::uint32_t>(k)));
    const Eigen::VectorXd ev = eigenvalues_of(gaussian_ensemble(n, s, stream));
    per[k] = gap_distribution({ev.data(), static_cast<std::size_t>(ev.size())}, window).gaps;
  });
  std::vector<double> pooled;
  for (const auto& g : per) pooled.insert(pooled.end(), g.begin(), g.end());
  return pooled;
}

}  // namespace rmt
