#include "rmt/cli.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "rmt/config.hpp"
#include "rmt/errors.hpp"
#include "rmt/experiments.hpp"
#include "rmt/profile.hpp"

namespace rmt::cli {

namespace {

using Runner = std::function<ExperimentReport(const ExperimentConfig&)>;

struct Subcommand {
  const char* name;
  const char* help;
  Runner runner;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> list{
      {"check-profile", "Variance-profile diagnostics (double stochasticity, spectral gaps)", run_check_profile},
      {"gamma-table", "Classical eigenvalue locations gamma_j as CSV", run_gamma_table},
      {"identities", "Resolvent identity suite on random small matrices", run_identities},
      {"lsc", "Local semicircle law over an (E, eta) grid", run_lsc},
      {"rigidity", "Eigenvalue rigidity statistics and N-scaling", run_rigidity},
      {"counting", "Deviation of the eigenvalue counting function from n_sc", run_counting},
      {"edge", "Edge universality: two-ensemble KS comparison", run_edge},
      {"extreme", "Exceedance frequency of the extreme-eigenvalue bound", run_extreme_bound},
      {"dbm-relax", "Gap-statistic relaxation along Dyson Brownian motion", run_dbm_relax},
  };
  return list;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

void print_summary(std::ostream& out, const ExperimentReport& r) {
  if (r.experiment == "identities") {
    for (const auto& [key, value] : r.summary.items()) {
      if (key.rfind("max_", 0) == 0) out << fmt::format("{} = {:.3e}\n", key, value.get<double>());
    }
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const ExperimentConfig defaults;
  CLI::App app{"Monte Carlo laboratory for generalized Wigner matrices", "rmtlab"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  std::string config_path;
  std::string calibration_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int samples = 0;
  std::vector<int> n_list;
  unsigned threads = 0;
  bool quiet = false;
  std::vector<std::string> overrides;

  const char* env_out = std::getenv("RMTLAB_OUT");
  const std::string default_out = env_out && *env_out ? env_out : defaults.output_dir;

  app.add_option("--config", config_path, "Key-value config file")->check(CLI::ExistingFile)->default_str("none");
  app.add_option("--calibration", calibration_path, "Calibration file with calibration.* keys")
      ->check(CLI::ExistingFile)
      ->default_str("built-in (config/calibration.cfg values)");
  app.add_option("--seed", seed, "Master seed (overrides experiment.seed)")->default_str(std::to_string(defaults.seed));
  app.add_option("--out", out_dir, "Output directory (overrides output.dir; env RMTLAB_OUT sets the default)")
      ->default_str(default_out);
  app.add_option("--samples", samples, "Samples per N (overrides experiment.samples)")
      ->default_str(std::to_string(defaults.samples));
  app.add_option("--n", n_list, "Comma-separated matrix sizes (overrides experiment.n)")
      ->delimiter(',')
      ->default_str(join_ints(defaults.n_list));
  app.add_option("--threads", threads, "Worker threads, 0 = hardware count (never changes results)")
      ->default_str("0");
  app.add_option("--set", overrides, "Override any config key: KEY=VALUE (repeatable)")->default_str("none");
  app.add_flag("--quiet", quiet, "Only print verdict lines")->default_str("false");

  for (const auto& s : subcommands()) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  const auto* sub = &subcommands().front();
  for (const auto& s : subcommands()) {
    if (name == s.name) sub = &s;
  }

  ExperimentConfig cfg;
  try {
    KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
    if (!calibration_path.empty()) {
      const KeyValueConfig cal = KeyValueConfig::load(calibration_path);
      for (const auto& [key, value] : cal.values()) {
        if (key.rfind("calibration.", 0) != 0) throw ConfigError(fmt::format("calibration file key '{}' lacks the calibration. prefix", key));
        if (!kv.has(key)) kv.set(key, value);
      }
    }
    if (!kv.has("output.dir")) kv.set("output.dir", default_out);
    if (name == "identities" && !kv.has("experiment.symmetry")) kv.set("experiment.symmetry", "mixed");
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects KEY=VALUE, got '{}'", o));
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (app.count("--seed")) kv.set("experiment.seed", std::to_string(seed));
    if (app.count("--samples")) kv.set("experiment.samples", std::to_string(samples));
    if (app.count("--threads")) kv.set("experiment.threads", std::to_string(threads));
    if (app.count("--out")) kv.set("output.dir", out_dir);
    if (app.count("--n")) {
      kv.set("experiment.n", join_ints(n_list));
      if (name == "identities") {
        if (n_list.size() != 1) throw ConfigError("identities: --n takes a single size");
        kv.set("identities.n_min", std::to_string(n_list.front()));
        kv.set("identities.n_max", std::to_string(n_list.front()));
      }
    }
    cfg = ExperimentConfig::from(kv);
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const ExperimentReport report = sub->runner(cfg);
    const auto written = write_report(report, cfg.output_dir);
    if (name == "check-profile") {
      for (int n : cfg.n_list) {
        const auto path = std::filesystem::path(cfg.output_dir) / fmt::format("check-profile_sigma2_N{}.txt", n);
        write_matrix_file(path.string(), build_profile(cfg.profile, n).sigma2());
      }
    }
    if (!quiet) {
      out << fmt::format("{}: seed {}, config hash {}\n", report.experiment, cfg.seed, report.config_hash);
      print_summary(out, report);
      for (const auto& p : written) out << "wrote " << p.string() << "\n";
    }
    for (const auto& c : report.checks) out << verdict_line(c) << "\n";
    return report.all_passed() ? kExitPass : kExitCheckFailed;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace rmt::cli
