// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if all pass.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rmt/cli.hpp"
#include "rmt/experiments.hpp"
#include "rmt/semicircle.hpp"

using namespace rmt;

namespace {

struct Verdict {
  bool passed = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string note) {
    passed = passed && ok;
    notes.push_back((ok ? "" : "[failed] ") + std::move(note));
  }
  void require(const ExperimentReport& r, const std::string& check_name) {
    const Check* c = r.check(check_name);
    if (!c) {
      require(false, check_name + " missing");
      return;
    }
    require(c->passed, c->name + ": " + c->detail);
  }
};

Calibration pinned() {
  Calibration c;
  c.lsc_slope_min = -1.2;
  c.lsc_slope_max = -0.8;
  c.lsc_offdiag_log_power = 2.0;
  c.rigidity_edge_slope = -2.0 / 3.0;
  c.rigidity_edge_slope_tol = 0.1;
  c.rigidity_bulk_slope = -1.0;
  c.rigidity_bulk_slope_tol = 0.15;
  c.rigidity_log_power = 2.0;
  c.counting_log_power = 2.0;
  c.edge_alpha = 0.01;
  c.edge_control_alpha = 0.05;
  c.dbm_start_ratio = 5.0;
  c.dbm_relaxed_ratio = 2.0;
  c.variance_z = 4.0;
  c.identity_tolerance = 1e-9;
  return c;
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.threads = 0;
  cfg.calibration = pinned();
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Verdict identities() {
  Verdict v;
  ExperimentConfig cfg = base_config();
  cfg.samples = 200;
  cfg.identity_n_min = 5;
  cfg.identity_n_max = 20;
  cfg.mixed_symmetry = true;
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_identities(cfg);
  const double elapsed = seconds_since(start);
  for (const char* name : {"diagonal_inverse", "off_diagonal", "diagonal_update", "entry_update", "ward"}) {
    v.require(r, std::string("identities.") + name);
  }
  v.require(elapsed < 30.0, fmt::format("runtime {:.2f} s < 30 s", elapsed));
  return v;
}

Verdict semicircle() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const int n = 1000;
  const double l_param = 0.1;
  const double floor = s_l_eta_floor(n, l_param);
  double worst_eq = 0.0, worst_abs = 0.0;
  int points = 0;
  for (int a = 0; a < 100; ++a) {
    const double e = -5.0 + 10.0 * a / 99;
    for (int b = 0; b < 100; ++b) {
      const double eta = floor * std::pow(10.0 / floor, (b + 1) / 100.0);
      const SpectralPoint z(e, eta);
      if (!in_s_l(z, n, l_param)) continue;
      const cplx m = m_sc(z);
      worst_eq = std::max(worst_eq, std::abs(m + 1.0 / (z.z() + m)));
      worst_abs = std::max(worst_abs, std::abs(m));
      ++points;
    }
  }
  v.require(points == 10000, fmt::format("{} grid points in S_L", points));
  v.require(worst_eq <= 1e-12, fmt::format("max |m + 1/(z + m)| = {:.2e} <= 1e-12", worst_eq));
  v.require(worst_abs <= 1.0, fmt::format("max |m_sc| = {:.6f} <= 1", worst_abs));

  const auto gamma = classical_locations(n);
  double worst_count = 0.0, worst_sym = 0.0;
  for (int j = 1; j <= n; ++j) {
    worst_count = std::max(worst_count, std::abs(n_sc(gamma[j - 1]) - static_cast<double>(j) / n));
    if (j < n) worst_sym = std::max(worst_sym, std::abs(gamma[j - 1] + gamma[n - j - 1]));
  }
  v.require(worst_count <= 1e-10, fmt::format("max |n_sc(gamma_j) - j/N| = {:.2e}", worst_count));
  v.require(worst_sym <= 1e-10, fmt::format("max |gamma_j + gamma_(N-j)| = {:.2e}", worst_sym));
  const double elapsed = seconds_since(start);
  v.require(elapsed < 5.0, fmt::format("runtime {:.2f} s < 5 s", elapsed));
  return v;
}

ExperimentReport local_law_report() {
  ExperimentConfig cfg = base_config();
  cfg.n_list = {512};
  cfg.samples = 100;
  cfg.energies = {0.0};
  cfg.eta_min_exponent = -0.9;
  cfg.eta_max_exponent = 0.0;
  cfg.eta_count = 8;
  return run_lsc(cfg);
}

Verdict local_law_slope(const ExperimentReport& r) {
  Verdict v;
  v.require(r, "lsc.slope[N=512,E=0]");
  return v;
}

Verdict offdiagonal(const ExperimentReport& r) {
  Verdict v;
  v.require(r, "lsc.offdiag_envelope[N=512]");
  return v;
}

Verdict rigidity() {
  Verdict v;
  ExperimentConfig cfg = base_config();
  cfg.n_list = {256, 512, 1024, 2048};
  cfg.samples = 100;
  const auto r = run_rigidity(cfg);
  v.require(r, "rigidity.edge_slope");
  v.require(r, "rigidity.bulk_slope");
  for (int n : cfg.n_list) v.require(r, fmt::format("rigidity.scaled_envelope[N={}]", n));
  return v;
}

Verdict counting() {
  Verdict v;
  ExperimentConfig cfg = base_config();
  cfg.n_list = {256, 1024};
  cfg.samples = 100;
  const auto r = run_counting(cfg);
  for (int n : cfg.n_list) v.require(r, fmt::format("counting.envelope[N={}]", n));
  return v;
}

Verdict edge() {
  Verdict v;
  ExperimentConfig cfg = base_config();
  cfg.n_list = {1024};
  cfg.samples = 400;
  cfg.ensemble = {"gaussian", 1.0};
  cfg.second = {"rademacher", 1.0};
  v.require(run_edge(cfg), "edge.universality[N=1024]");
  cfg.second.scale = std::sqrt(2.0);
  cfg.allow_unmatched = true;
  v.require(run_edge(cfg), "edge.negative_control[N=1024]");
  return v;
}

Verdict dbm() {
  Verdict v;
  ExperimentConfig cfg = base_config();
  cfg.n_list = {512};
  cfg.samples = 100;
  cfg.dbm_start = "rigid";
  cfg.dbm_times = {FlowTime::parse("0"), FlowTime::parse("1/(2N)"), FlowTime::parse("2/N"), FlowTime::parse("8/N"),
                   FlowTime::parse("4")};
  cfg.dbm_relaxed_time = FlowTime::parse("8/N");
  const auto r = run_dbm_relax(cfg);
  v.require(r, "dbm.start_far[N=512]");
  v.require(r, "dbm.relaxed[N=512,t=8/N]");
  for (const auto& t : cfg.dbm_times) v.require(r, fmt::format("dbm.variance[t={}]", t.text()));
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "rmtlab_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs{
      {"check-profile", "--n", "24", "--set", "profile.kind=band"},
      {"gamma-table", "--n", "50"},
      {"identities", "--samples", "40"},
      {"lsc", "--n", "64,96", "--samples", "8", "--set", "lsc.energies=-1,0"},
      {"rigidity", "--n", "32,48,64", "--samples", "8"},
      {"counting", "--n", "32,64", "--samples", "8"},
      {"edge", "--n", "48", "--samples", "30", "--set", "edge.moment_draws=10000", "--set", "edge.top_k=2"},
      {"extreme", "--n", "32,64", "--samples", "8"},
      {"dbm-relax", "--n", "128", "--samples", "6"},
  };
  for (const auto& run : runs) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "3", "1"}) {
      const fs::path dir = root / fmt::format("{}_{}", run.front(), dirs.size());
      std::vector<std::string> args{"rmtlab"};
      args.insert(args.end(), run.begin(), run.end());
      args.insert(args.end(), {"--seed", "11", "--threads", threads, "--out", dir.string(), "--quiet"});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
      if (code == cli::kExitError || code == cli::kExitUsage) v.require(false, run.front() + ": " + err.str());
      dirs.push_back(dir);
    }
    std::size_t files = 0;
    bool same = true;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const std::string reference = slurp(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) same = same && slurp(dirs[k] / entry.path().filename()) == reference;
    }
    v.require(same && files > 0, fmt::format("{}: {} CSV files identical across threads 1, 3, 1", run.front(), files));
  }
  fs::remove_all(root);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> run;
  };
  ExperimentReport lsc;
  bool lsc_ready = false;
  auto lsc_report = [&]() -> const ExperimentReport& {
    if (!lsc_ready) {
      lsc = local_law_report();
      lsc_ready = true;
    }
    return lsc;
  };
  const std::vector<Criterion> criteria{
      {1, "resolvent identity suite", identities},
      {2, "semicircle analytics", semicircle},
      {3, "local law scaling", [&] { return local_law_slope(lsc_report()); }},
      {4, "off-diagonal law", [&] { return offdiagonal(lsc_report()); }},
      {5, "rigidity slopes", rigidity},
      {6, "counting function", counting},
      {7, "edge universality", edge},
      {8, "DBM relaxation", dbm},
      {9, "determinism", determinism},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(start);
    all = all && v.passed;
    for (const auto& note : v.notes) std::cout << "    " << note << "\n";
    std::cout << fmt::format("{} criterion {}: {} ({:.1f} s)", v.passed ? "PASS" : "FAIL", c.id, c.title, elapsed) << std::endl;
  }
  return all ? 0 : 1;
}
