#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rmt/errors.hpp"
#include "rmt/experiments.hpp"
#include "rmt/semicircle.hpp"

using namespace rmt;

namespace {

// N sup |F_N(E) - n_sc(E)| over a dense grid plus both sides of every jump.
double counting_brute_force(const std::vector<double>& eigs) {
  const double n = static_cast<double>(eigs.size());
  auto count = [&](double e) {
    return static_cast<double>(std::upper_bound(eigs.begin(), eigs.end(), e) - eigs.begin()) / n;
  };
  std::vector<double> probes;
  for (int k = 0; k <= 20000; ++k) probes.push_back(-5.0 + 10.0 * k / 20000);
  for (double x : eigs) {
    if (std::abs(x) <= 5.0) {
      probes.push_back(x);
      probes.push_back(std::nextafter(x, -10.0));
    }
  }
  double sup = 0.0;
  for (double e : probes) {
    if (std::abs(e) <= 5.0) sup = std::max(sup, std::abs(count(e) - n_sc(e)));
  }
  return n * sup;
}

std::string csv_of(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("counting deviation matches a brute-force supremum") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = std::uniform_int_distribution<int>(5, 60)(rng);
    std::normal_distribution<double> normal(0.0, trial % 4 == 0 ? 3.0 : 1.0);
    std::vector<double> eigs(n);
    for (auto& x : eigs) x = normal(rng);
    std::sort(eigs.begin(), eigs.end());
    CAPTURE(trial);
    CHECK(counting_deviation(eigs) == doctest::Approx(counting_brute_force(eigs)).epsilon(1e-9));
  }
  const std::vector<double> gamma = classical_locations(100);
  CHECK(counting_deviation(gamma) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rigidity statistics") {
  const auto gamma = classical_locations(64);
  const RigidityStats zero = rigidity_statistics(gamma, gamma);
  CHECK(zero.scaled_max == 0.0);
  CHECK(zero.bulk_max == 0.0);
  CHECK(zero.edge == 0.0);
  std::vector<double> shifted = gamma;
  for (auto& x : shifted) x += 0.01;
  const RigidityStats r = rigidity_statistics(shifted, gamma);
  CHECK(r.edge == doctest::Approx(0.01));
  CHECK(r.mid == doctest::Approx(0.01));
  CHECK(r.bulk_max == doctest::Approx(0.64));
  // Largest weight min(j, N+1-j)^(1/3) is at j = 32 or 33.
  CHECK(r.scaled_max == doctest::Approx(std::pow(64.0, 2.0 / 3.0) * std::cbrt(32.0) * 0.01));
  CHECK_THROWS_AS(rigidity_statistics(std::vector<double>(3, 0.0), gamma), DimensionError);
}

TEST_CASE("eta sweep") {
  const auto etas = eta_sweep(512, -0.9, 0.0, 8);
  REQUIRE(etas.size() == 8);
  CHECK(etas.front() == doctest::Approx(std::pow(512.0, -0.9)));
  CHECK(etas.back() == doctest::Approx(1.0));
  for (std::size_t k = 1; k < etas.size(); ++k) CHECK(etas[k] > etas[k - 1]);
}

TEST_CASE("gamma table") {
  ExperimentConfig cfg;
  cfg.n_list = {10};
  const auto r = run_gamma_table(cfg);
  const auto& t = r.table("gamma");
  REQUIRE(t.rows.size() == 10);
  CHECK(std::get<double>(t.rows.back()[2]) == 2.0);
}

TEST_CASE("identity suite on a small run") {
  ExperimentConfig cfg;
  cfg.samples = 30;
  cfg.mixed_symmetry = true;
  const auto r = run_identities(cfg);
  CHECK(r.all_passed());
  CHECK(r.checks.size() == 7);
  CHECK(r.table("trials").rows.size() == 30);
}

TEST_CASE("outputs do not depend on the thread count") {
  ExperimentConfig cfg;
  cfg.n_list = {32, 48, 64};
  cfg.samples = 6;
  cfg.eta_count = 3;
  cfg.energies = {0.0, 1.0};
  cfg.mixed_symmetry = true;
  cfg.threads = 1;
  ExperimentConfig cfg3 = cfg;
  cfg3.threads = 3;
  for (auto run : {run_lsc, run_rigidity, run_counting, run_extreme_bound, run_identities}) {
    const auto a = run(cfg);
    const auto b = run(cfg3);
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t k = 0; k < a.tables.size(); ++k) CHECK(csv_of(a.tables[k]) == csv_of(b.tables[k]));
    CHECK(a.config_hash == b.config_hash);
  }
}

TEST_CASE("edge refuses unmatched second moments unless allowed") {
  ExperimentConfig cfg;
  cfg.n_list = {32};
  cfg.samples = 20;
  cfg.moment_draws = 10000;
  cfg.second.scale = std::sqrt(2.0);
  CHECK_THROWS_AS(run_edge(cfg), ConfigError);
  cfg.allow_unmatched = true;
  const auto r = run_edge(cfg);
  CHECK(r.check("edge.negative_control[N=32]") != nullptr);
  CHECK(r.summary["moments_match_order2"] == false);
}

TEST_CASE("dbm relaxation needs enough eigenvalues in the window") {
  ExperimentConfig cfg;
  cfg.n_list = {20};
  cfg.samples = 2;
  CHECK_THROWS_AS(run_dbm_relax(cfg), SampleSizeError);
}

TEST_CASE("profile check reports the band spectrum") {
  ExperimentConfig cfg;
  cfg.n_list = {16};
  cfg.profile.kind = "band";
  cfg.profile.bandwidth = 2;
  const auto r = run_check_profile(cfg);
  CHECK(r.all_passed());
  CHECK(r.table("spectrum").rows.size() == 16);
}

TEST_CASE("edge self-test: identical laws reject at about the nominal 5% rate") {
  // With 20 independent seeds, 5 or more rejections has probability about 0.003.
  int rejections = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ExperimentConfig cfg;
    cfg.n_list = {32};
    cfg.samples = 100;
    cfg.moment_draws = 10000;
    cfg.second = cfg.ensemble;
    cfg.seed = seed;
    const auto r = run_edge(cfg);
    CHECK(r.summary["moments_match_order4"] == true);
    const auto& top = r.table("ks").rows.front();
    REQUIRE(std::get<std::string>(top[1]) == "top");
    if (std::get<double>(top[2]) >= std::get<double>(top[3])) ++rejections;
  }
  MESSAGE("rejections at 5%: ", rejections, "/20");
  CHECK(rejections <= 4);
}
