#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rmt/sampler.hpp"
#include "rmt/stats.hpp"

namespace rmt {

// Matrix Ornstein-Uhlenbeck flow dH = N^{-1/2} dB - H/2 dt. Its law at time t
// is that of e^{-t/2} H_0 + sqrt(1 - e^{-t}) V with V a GOE/GUE matrix whose
// entries all have variance 1/N; the eigenvalues perform Dyson Brownian motion.

enum class PathMode { exact_ou, euler };

struct FlowState {
  double t = 0.0;
  HermitianMatrix h;
  std::shared_ptr<const VarianceProfile> initial_profile;
  PathMode path_mode = PathMode::exact_ou;
};

/// e^{-t} sigma2_0 + (1 - e^{-t}) / n
double expected_variance(double sigma2_0, double t, int n);

/// e^{-dt/2} h + sqrt(1 - e^{-dt}) noise.
HermitianMatrix ou_step(const HermitianMatrix& h, double dt, const HermitianMatrix& noise);
/// h - h dt / 2 + sqrt(dt) noise.
HermitianMatrix euler_step(const HermitianMatrix& h, double dt, const HermitianMatrix& noise);

/// Exact-in-law sample of H_t. t = 0 returns h0 unchanged; DomainError for t < 0.
HermitianMatrix ou_endpoint(const HermitianMatrix& h0, double t, RngStream& stream);
inline HermitianMatrix ou_endpoint(const WignerSample& h0, double t, RngStream& stream) {
  return ou_endpoint(h0.h(), t, stream);
}

/// States at every time of `t_grid` (which must start at 0 and increase
/// strictly). exact_ou composes exact one-step transitions; euler uses
/// Euler-Maruyama steps on the same grid and exists for cross-validation.
std::vector<FlowState> ou_path(const WignerSample& h0, std::span<const double> t_grid, RngStream& stream,
                               PathMode mode = PathMode::exact_ou);

/// diag(gamma_1, ..., gamma_n): rigid, deterministic and far from GOE spacing.
HermitianMatrix rigid_start(int n, SymmetryClass s);

struct GapWindow {
  double center = 0.0;
  double half_width = 1.0;
};

struct GapSample {
  std::vector<double> gaps;
  GapWindow window;
};

/// Unfolded nearest-neighbour spacings (lambda_{j+1} - lambda_j) N rho_sc(lambda_j)
/// for lambda_j inside the window. `eigs` sorted ascending, N = eigs.size().
/// SampleSizeError when fewer than `min_in_window` eigenvalues fall inside.
GapSample gap_distribution(std::span<const double> eigs, GapWindow window, std::size_t min_in_window = 50);

/// Second moments of H_t against e^{-t} E|H_0,ij|^2 + (1 - e^{-t})/N, pooled
/// separately over diagonal and off-diagonal (i < j) entries and samples.
struct VarianceCheck {
  double t = 0.0;
  MeanSe offdiag_residual;  // of N(|H_t,ij|^2 - expected)
  MeanSe diag_residual;
  double z_offdiag = 0.0;
  double z_diag = 0.0;
  bool within(double z_limit) const;
};

VarianceCheck variance_interpolation(const RealMatrix& initial_second_moment, double t,
                                     std::span<const HermitianMatrix> samples);

struct RelaxationPoint {
  double t = 0.0;
  KsResult ks;
  std::size_t n_gaps = 0;
  std::vector<std::vector<double>> gaps_per_sample;
  VarianceCheck variance;
};

/// Produces H_0 for a sample index.
using InitialFactory = std::function<HermitianMatrix(std::uint64_t sample_index)>;

struct RelaxationOptions {
  int samples = 40;
  GapWindow window;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Supplies E|H_0,ij|^2 for the variance check; defaults to |H_0(0)|^2
  // (exact for deterministic starts).
  std::function<RealMatrix()> initial_second_moment;
};

/// Pooled unfolded gaps at each t against the reference gaps, two-sample KS.
std::vector<RelaxationPoint> relaxation_curve(const InitialFactory& h0_factory, std::span<const double> t_list,
                                              std::span<const double> reference_gaps, const RelaxationOptions& options);

/// Pooled unfolded gaps of `samples` GOE/GUE matrices (the equilibrium reference).
std::vector<double> equilibrium_gaps(int n, SymmetryClass s, int samples, GapWindow window, std::uint64_t seed,
                                     unsigned threads);

}  // namespace rmt
