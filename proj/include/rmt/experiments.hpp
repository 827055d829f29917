#pragma once

#include <span>
#include <vector>

#include "rmt/config.hpp"
#include "rmt/report.hpp"

namespace rmt {

// Monte Carlo drivers. Every report is a pure function of the config: samples
// draw from derive_stream(seed, stream_index(slot, sample)) and rows are
// aggregated in sample order after the parallel phase.

/// Local semicircle law over the configured (E, eta) grid.
ExperimentReport run_lsc(const ExperimentConfig& cfg);
/// Eigenvalue rigidity statistics and their scaling in N.
ExperimentReport run_rigidity(const ExperimentConfig& cfg);
/// N sup_E |empirical counting function - n_sc(E)|.
ExperimentReport run_counting(const ExperimentConfig& cfg);
/// Two-ensemble comparison of N^{2/3}(lambda_N - 2) (and lambda_1, top-k).
ExperimentReport run_edge(const ExperimentConfig& cfg);
/// Exceedance frequency of max |lambda| >= 2 + c N^{-2/3} (log N)^{3/2}.
ExperimentReport run_extreme_bound(const ExperimentConfig& cfg);
/// Unfolded-gap relaxation along the matrix OU flow, plus the variance check.
ExperimentReport run_dbm_relax(const ExperimentConfig& cfg);
/// Random resolvent identity suite (perturbation formulas, Ward identity,
/// self-consistent equation).
ExperimentReport run_identities(const ExperimentConfig& cfg);
/// Classical locations gamma_j for every N in the list.
ExperimentReport run_gamma_table(const ExperimentConfig& cfg);
/// Variance-profile assumption diagnostics.
ExperimentReport run_check_profile(const ExperimentConfig& cfg);

struct RigidityStats {
  double scaled_max = 0.0;  // max_j N^{2/3} min(j, N+1-j)^{1/3} |lambda_j - gamma_j|
  double bulk_max = 0.0;    // max_{N/4 <= j <= 3N/4} N |lambda_j - gamma_j|
  double edge = 0.0;        // |lambda_N - 2|
  double mid = 0.0;         // |lambda_{N/2} - gamma_{N/2}|
};

/// `eigs` ascending; `gamma` from classical_locations(N).
RigidityStats rigidity_statistics(std::span<const double> eigs, std::span<const double> gamma);

/// N sup_{|E| <= 5} |#{lambda_j <= E}/N - n_sc(E)|, evaluated at the jumps.
double counting_deviation(std::span<const double> eigs);

/// Log-spaced eta values N^x, x from min_exponent to max_exponent.
std::vector<double> eta_sweep(int n, double min_exponent, double max_exponent, int count);

}  // namespace rmt
