#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "rmt/sampler.hpp"

namespace rmt {

/// Flat `dotted.key = value` file. '#' starts a comment; blank lines are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& origin = "<stream>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const;

  /// ConfigError naming the first key outside `known` (prefix match with "*").
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

/// A time written either as a plain number or as a multiple of 1/N ("8/N",
/// "0.5/N", "1/(2N)").
struct FlowTime {
  double coefficient = 0.0;
  bool per_n = false;
  double at(int n) const { return per_n ? coefficient / n : coefficient; }
  std::string text() const;
  static FlowTime parse(const std::string& token);
};

struct ProfileSpec {
  std::string kind = "flat";  // flat | band | file
  double bandwidth_fraction = 0.25;  // w = fraction * N when bandwidth == 0
  int bandwidth = 0;
  std::string shape = "indicator";
  std::string file;
};

struct EnsembleSpec {
  std::string distribution = "gaussian";
  double scale = 1.0;  // multiplies every entry (negative controls only)
};

/// Thresholds for the acceptance checks. The defaults equal the values in
/// config/calibration.cfg; see that file for how they were obtained.
struct Calibration {
  double lsc_slope_min = -1.2;
  double lsc_slope_max = -0.8;
  double lsc_scaled_lambda_log_power = 4.0;  // median N eta Lambda <= (log N)^p
  double lsc_offdiag_log_power = 2.0;        // median offdiag ratio <= (log N)^p
  double lsc_global_lambda_max = 0.05;       // Lambda at eta >= 10, N >= 256
  double rigidity_edge_slope = -2.0 / 3.0;
  double rigidity_edge_slope_tol = 0.1;
  double rigidity_bulk_slope = -1.0;
  double rigidity_bulk_slope_tol = 0.15;
  double rigidity_log_power = 2.0;  // median R <= (log N)^p
  double counting_log_power = 2.0;  // median S <= (log N)^p
  double edge_alpha = 0.01;         // matched ensembles: KS below this critical value
  double edge_control_alpha = 0.05;  // unmatched control: KS above this critical value
  double extreme_c = 10.0;           // no exceedances expected at this c
  double dbm_start_ratio = 5.0;      // KS(0) >= ratio * KS(t_final)
  double dbm_relaxed_ratio = 2.0;    // KS(t_relaxed) <= ratio * KS(t_final)
  double variance_z = 4.0;
  double identity_tolerance = 1e-9;

  static Calibration from(const KeyValueConfig& kv, const Calibration& base);
  static Calibration from(const KeyValueConfig& kv);
  nlohmann::json to_json() const;
};

struct ExperimentConfig {
  std::vector<int> n_list{256};
  int samples = 100;
  ProfileSpec profile;
  EnsembleSpec ensemble;
  EnsembleSpec second{"rademacher", 1.0};
  SymmetryClass symmetry = SymmetryClass::symmetric;
  bool mixed_symmetry = false;  // identities: alternate classes per trial
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware count; never affects results

  // local law grid: eta = N^x for x in [eta_min_exponent, eta_max_exponent]
  std::vector<double> energies{0.0};
  double eta_min_exponent = -0.9;
  double eta_max_exponent = 0.0;
  int eta_count = 8;
  std::vector<double> etas;  // explicit values override the exponent sweep
  std::optional<double> l_param;
  std::optional<int> log_power;

  // edge universality
  int top_k = 1;
  bool allow_unmatched = false;
  int moment_draws = 100000;

  // extreme-eigenvalue bound
  std::vector<double> extreme_c{0.0, 1.0, 2.0, 5.0, 10.0};

  // Dyson Brownian motion relaxation
  std::vector<FlowTime> dbm_times{{0.0, false}, {0.5, true}, {2.0, true}, {8.0, true}, {4.0, false}};
  FlowTime dbm_relaxed_time{8.0, true};
  std::string dbm_start = "rigid";  // rigid | wigner
  int dbm_reference_samples = 0;    // 0 = same as samples
  double dbm_window_center = 0.0;
  double dbm_window_half_width = 1.0;

  // identity suite: N drawn uniformly from [identity_n_min, identity_n_max]
  int identity_n_min = 5;
  int identity_n_max = 20;

  std::string output_dir = "rmtlab-out";
  Calibration calibration;

  static ExperimentConfig from(const KeyValueConfig& kv);
  /// Echo of every result-affecting field (threads and output paths excluded).
  nlohmann::json to_json() const;
  void validate() const;
};

/// Builds the variance profile described by `spec` at dimension n.
VarianceProfile build_profile(const ProfileSpec& spec, int n);

/// Git-style content hash: SHA-1 of "blob <len>\0<content>", hex encoded.
std::string content_hash(const std::string& content);

}  // namespace rmt
