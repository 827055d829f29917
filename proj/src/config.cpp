#include "rmt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <boost/uuid/detail/sha1.hpp>
#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("config key '{}': '{}' is not a number", key, text));
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("config key '{}': '{}' is not an integer", key, text));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& origin) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, lineno));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, lineno));
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return parse(in, path);
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(key, it->second);
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_int(key, it->second);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used == it->second.size() && it->second.front() != '-') return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("config key '{}': '{}' is not an unsigned integer", key, it->second));
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& tok : split_list(it->second)) out.push_back(to_double(key, tok));
  return out;
}

std::vector<int> KeyValueConfig::get_ints(const std::string& key, std::vector<int> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (const auto& tok : split_list(it->second)) out.push_back(static_cast<int>(to_int(key, tok)));
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (known.count(key)) continue;
    bool matched = false;
    for (const auto& k : known) {
      if (!k.empty() && k.back() == '*' && key.rfind(k.substr(0, k.size() - 1), 0) == 0) matched = true;
    }
    if (!matched) throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

std::string FlowTime::text() const {
  if (!per_n) return fmt::format("{}", coefficient);
  return fmt::format("{}/N", coefficient);
}

FlowTime FlowTime::parse(const std::string& token) {
  std::string t;
  for (char c : token) {
    if (c != ' ') t.push_back(c);
  }
  FlowTime out;
  // a/(bN)
  if (const auto open = t.find("/("); open != std::string::npos && t.size() > open + 3 && t.substr(t.size() - 2) == "N)") {
    const double a = to_double("dbm.times", t.substr(0, open));
    const std::string inner = t.substr(open + 2, t.size() - open - 4);
    const double b = inner.empty() ? 1.0 : to_double("dbm.times", inner);
    out.coefficient = a / b;
    out.per_n = true;
  } else if (t.size() > 2 && t.substr(t.size() - 2) == "/N") {
    out.coefficient = to_double("dbm.times", t.substr(0, t.size() - 2));
    out.per_n = true;
  } else {
    out.coefficient = to_double("dbm.times", t);
  }
  if (!(out.coefficient >= 0.0)) throw ConfigError(fmt::format("flow time '{}' must be nonnegative", token));
  return out;
}

Calibration Calibration::from(const KeyValueConfig& kv) { return from(kv, Calibration{}); }

Calibration Calibration::from(const KeyValueConfig& kv, const Calibration& base) {
  Calibration c = base;
  auto rd = [&kv](const char* key, double& field) { field = kv.get_double(std::string("calibration.") + key, field); };
  rd("lsc_slope_min", c.lsc_slope_min);
  rd("lsc_slope_max", c.lsc_slope_max);
  rd("lsc_scaled_lambda_log_power", c.lsc_scaled_lambda_log_power);
  rd("lsc_offdiag_log_power", c.lsc_offdiag_log_power);
  rd("lsc_global_lambda_max", c.lsc_global_lambda_max);
  rd("rigidity_edge_slope", c.rigidity_edge_slope);
  rd("rigidity_edge_slope_tol", c.rigidity_edge_slope_tol);
  rd("rigidity_bulk_slope", c.rigidity_bulk_slope);
  rd("rigidity_bulk_slope_tol", c.rigidity_bulk_slope_tol);
  rd("rigidity_log_power", c.rigidity_log_power);
  rd("counting_log_power", c.counting_log_power);
  rd("edge_alpha", c.edge_alpha);
  rd("edge_control_alpha", c.edge_control_alpha);
  rd("extreme_c", c.extreme_c);
  rd("dbm_start_ratio", c.dbm_start_ratio);
  rd("dbm_relaxed_ratio", c.dbm_relaxed_ratio);
  rd("variance_z", c.variance_z);
  rd("identity_tolerance", c.identity_tolerance);
  return c;
}

nlohmann::json Calibration::to_json() const {
  return {{"lsc_slope_min", lsc_slope_min},
          {"lsc_slope_max", lsc_slope_max},
          {"lsc_scaled_lambda_log_power", lsc_scaled_lambda_log_power},
          {"lsc_offdiag_log_power", lsc_offdiag_log_power},
          {"lsc_global_lambda_max", lsc_global_lambda_max},
          {"rigidity_edge_slope", rigidity_edge_slope},
          {"rigidity_edge_slope_tol", rigidity_edge_slope_tol},
          {"rigidity_bulk_slope", rigidity_bulk_slope},
          {"rigidity_bulk_slope_tol", rigidity_bulk_slope_tol},
          {"rigidity_log_power", rigidity_log_power},
          {"counting_log_power", counting_log_power},
          {"edge_alpha", edge_alpha},
          {"edge_control_alpha", edge_control_alpha},
          {"extreme_c", extreme_c},
          {"dbm_start_ratio", dbm_start_ratio},
          {"dbm_relaxed_ratio", dbm_relaxed_ratio},
          {"variance_z", variance_z},
          {"identity_tolerance", identity_tolerance}};
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
  kv.require_known({"experiment.n", "experiment.samples", "experiment.seed", "experiment.threads",
                    "experiment.symmetry", "profile.kind", "profile.bandwidth", "profile.bandwidth_fraction",
                    "profile.shape", "profile.file", "ensemble.distribution", "ensemble.scale",
                    "second.distribution", "second.scale", "lsc.energies", "lsc.eta_min_exponent",
                    "lsc.eta_max_exponent", "lsc.eta_count", "lsc.etas", "lsc.l_param", "lsc.log_power",
                    "edge.top_k", "edge.allow_unmatched", "edge.moment_draws", "extreme.c", "dbm.times",
                    "dbm.relaxed_time", "dbm.start", "dbm.reference_samples", "dbm.window_center",
                    "dbm.window_half_width", "identities.n_min", "identities.n_max", "output.dir",
                    "calibration.*"});
  ExperimentConfig c;
  c.n_list = kv.get_ints("experiment.n", c.n_list);
  c.samples = static_cast<int>(kv.get_int("experiment.samples", c.samples));
  c.seed = kv.get_u64("experiment.seed", c.seed);
  c.threads = static_cast<unsigned>(kv.get_int("experiment.threads", c.threads));
  const std::string sym = kv.get_string("experiment.symmetry", to_string(c.symmetry));
  c.mixed_symmetry = sym == "mixed";
  if (!c.mixed_symmetry) c.symmetry = symmetry_from_string(sym);

  c.profile.kind = kv.get_string("profile.kind", c.profile.kind);
  c.profile.bandwidth = static_cast<int>(kv.get_int("profile.bandwidth", c.profile.bandwidth));
  c.profile.bandwidth_fraction = kv.get_double("profile.bandwidth_fraction", c.profile.bandwidth_fraction);
  c.profile.shape = kv.get_string("profile.shape", c.profile.shape);
  c.profile.file = kv.get_string("profile.file", c.profile.file);
  c.ensemble.distribution = kv.get_string("ensemble.distribution", c.ensemble.distribution);
  c.ensemble.scale = kv.get_double("ensemble.scale", c.ensemble.scale);
  c.second.distribution = kv.get_string("second.distribution", c.second.distribution);
  c.second.scale = kv.get_double("second.scale", c.second.scale);

  c.energies = kv.get_doubles("lsc.energies", c.energies);
  c.eta_min_exponent = kv.get_double("lsc.eta_min_exponent", c.eta_min_exponent);
  c.eta_max_exponent = kv.get_double("lsc.eta_max_exponent", c.eta_max_exponent);
  c.eta_count = static_cast<int>(kv.get_int("lsc.eta_count", c.eta_count));
  c.etas = kv.get_doubles("lsc.etas", c.etas);
  if (kv.has("lsc.l_param") && kv.get_string("lsc.l_param", "") != "auto") c.l_param = kv.get_double("lsc.l_param", 0.0);
  if (kv.has("lsc.log_power") && kv.get_string("lsc.log_power", "") != "auto") {
    c.log_power = static_cast<int>(kv.get_int("lsc.log_power", 0));
  }

  c.top_k = static_cast<int>(kv.get_int("edge.top_k", c.top_k));
  c.allow_unmatched = kv.get_bool("edge.allow_unmatched", c.allow_unmatched);
  c.moment_draws = static_cast<int>(kv.get_int("edge.moment_draws", c.moment_draws));
  c.extreme_c = kv.get_doubles("extreme.c", c.extreme_c);

  if (kv.has("dbm.times")) {
    c.dbm_times.clear();
    std::string raw = kv.get_string("dbm.times", "");
    std::istringstream in(raw);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!trim(tok).empty()) c.dbm_times.push_back(FlowTime::parse(trim(tok)));
    }
  }
  if (kv.has("dbm.relaxed_time")) c.dbm_relaxed_time = FlowTime::parse(kv.get_string("dbm.relaxed_time", ""));
  c.dbm_start = kv.get_string("dbm.start", c.dbm_start);
  c.dbm_reference_samples = static_cast<int>(kv.get_int("dbm.reference_samples", c.dbm_reference_samples));
  c.dbm_window_center = kv.get_double("dbm.window_center", c.dbm_window_center);
  c.dbm_window_half_width = kv.get_double("dbm.window_half_width", c.dbm_window_half_width);

  c.identity_n_min = static_cast<int>(kv.get_int("identities.n_min", c.identity_n_min));
  c.identity_n_max = static_cast<int>(kv.get_int("identities.n_max", c.identity_n_max));
  c.output_dir = kv.get_string("output.dir", c.output_dir);
  c.calibration = Calibration::from(kv);
  return c;
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw ConfigError("experiment.n is empty");
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw ConfigError("experiment.n must be sorted ascending");
  for (int n : n_list) {
    if (n < 1) throw ConfigError(fmt::format("experiment.n contains {} (< 1)", n));
  }
  if (samples < 1) throw ConfigError("experiment.samples must be >= 1");
  if (eta_count < 1) throw ConfigError("lsc.eta_count must be >= 1");
  if (top_k < 1) throw ConfigError("edge.top_k must be >= 1");
  if (identity_n_min < 5 || identity_n_max < identity_n_min) {
    throw ConfigError("identities.n_min must be >= 5 and <= identities.n_max");
  }
  if (dbm_start != "rigid" && dbm_start != "wigner") throw ConfigError("dbm.start must be rigid|wigner");
  if (profile.kind != "flat" && profile.kind != "band" && profile.kind != "file") {
    throw ConfigError("profile.kind must be flat|band|file");
  }
  (void)EntryDistribution::parse(ensemble.distribution);
  (void)EntryDistribution::parse(second.distribution);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json times = nlohmann::json::array();
  for (const auto& t : dbm_times) times.push_back(t.text());
  return {{"experiment", {{"n", n_list}, {"samples", samples}, {"seed", seed},
                          {"symmetry", mixed_symmetry ? std::string("mixed") : to_string(symmetry)}}},
          {"profile", {{"kind", profile.kind}, {"bandwidth", profile.bandwidth},
                       {"bandwidth_fraction", profile.bandwidth_fraction}, {"shape", profile.shape},
                       {"file", profile.file}}},
          {"ensemble", {{"distribution", ensemble.distribution}, {"scale", ensemble.scale}}},
          {"second", {{"distribution", second.distribution}, {"scale", second.scale}}},
          {"lsc", {{"energies", energies}, {"eta_min_exponent", eta_min_exponent},
                   {"eta_max_exponent", eta_max_exponent}, {"eta_count", eta_count}, {"etas", etas},
                   {"l_param", l_param ? nlohmann::json(*l_param) : nlohmann::json("auto")},
                   {"log_power", log_power ? nlohmann::json(*log_power) : nlohmann::json("auto")}}},
          {"edge", {{"top_k", top_k}, {"allow_unmatched", allow_unmatched}, {"moment_draws", moment_draws}}},
          {"extreme", {{"c", extreme_c}}},
          {"dbm", {{"times", times}, {"relaxed_time", dbm_relaxed_time.text()}, {"start", dbm_start},
                   {"reference_samples", dbm_reference_samples}, {"window_center", dbm_window_center},
                   {"window_half_width", dbm_window_half_width}}},
          {"identities", {{"n_min", identity_n_min}, {"n_max", identity_n_max}}},
          {"calibration", calibration.to_json()}};
}

VarianceProfile build_profile(const ProfileSpec& spec, int n) {
  if (spec.kind == "flat") return flat_profile(n);
  if (spec.kind == "band") {
    int w = spec.bandwidth;
    if (w == 0) w = std::max(1, static_cast<int>(std::lround(spec.bandwidth_fraction * n)));
    return band_profile(n, w, shape_by_name(spec.shape), spec.shape);
  }
  if (spec.kind == "file") {
    if (spec.file.empty()) throw ConfigError("profile.kind = file needs profile.file");
    VarianceProfile p = custom_profile(read_matrix_file(spec.file));
    if (p.n() != n) throw ConfigError(fmt::format("profile file has N={}, experiment needs N={}", p.n(), n));
    return p;
  }
  throw ConfigError(fmt::format("unknown profile kind '{}'", spec.kind));
}

std::string content_hash(const std::string& content) {
  boost::uuids::detail::sha1 sha;
  const std::string header = fmt::format("blob {}", content.size());
  sha.process_bytes(header.data(), header.size());
  sha.process_byte(0);
  sha.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type digest;
  sha.get_digest(digest);
  std::string hex;
  for (unsigned word : digest) hex += fmt::format("{:08x}", word);
  return hex;
}

}  // namespace rmt
