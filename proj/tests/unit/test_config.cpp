#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "rmt/config.hpp"
#include "rmt/errors.hpp"

using namespace rmt;

namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}

}  // namespace

TEST_CASE("key-value parsing") {
  const auto kv = parse("# comment\n\nexperiment.n = 256, 512 1024\nexperiment.seed=7  # trailing\nedge.allow_unmatched = yes\n");
  CHECK(kv.get_ints("experiment.n", {}) == std::vector<int>{256, 512, 1024});
  CHECK(kv.get_u64("experiment.seed", 0) == 7);
  CHECK(kv.get_bool("edge.allow_unmatched", false));
  CHECK(kv.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse("x = abc\n").get_double("x", 0.0), ConfigError);
  CHECK_THROWS_AS(parse("x = 1.5\n").get_int("x", 0), ConfigError);
  CHECK_THROWS_AS(parse("x = maybe\n").get_bool("x", false), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("flow times") {
  CHECK(FlowTime::parse("8/N").at(512) == doctest::Approx(8.0 / 512));
  CHECK(FlowTime::parse("1/(2N)").at(512) == doctest::Approx(1.0 / 1024));
  CHECK(FlowTime::parse("0.5/N").at(100) == doctest::Approx(0.005));
  CHECK(FlowTime::parse("4").at(512) == 4.0);
  CHECK(FlowTime::parse("4").text() == "4");
  CHECK(FlowTime::parse("8/N").text() == "8/N");
  CHECK_THROWS_AS(FlowTime::parse("-1"), ConfigError);
  CHECK_THROWS_AS(FlowTime::parse("x/N"), ConfigError);
}

TEST_CASE("experiment config from keys") {
  const auto cfg = ExperimentConfig::from(parse(
      "experiment.n = 64,128\nexperiment.symmetry = mixed\nprofile.kind = band\nprofile.bandwidth = 5\n"
      "dbm.times = 0, 1/(2N), 4\nlsc.l_param = 0.2\ncalibration.variance_z = 3\n"));
  CHECK(cfg.n_list == std::vector<int>{64, 128});
  CHECK(cfg.mixed_symmetry);
  CHECK(cfg.dbm_times.size() == 3);
  CHECK(cfg.dbm_times[1].at(64) == doctest::Approx(1.0 / 128));
  CHECK(cfg.l_param.has_value());
  CHECK(*cfg.l_param == 0.2);
  CHECK(cfg.calibration.variance_z == 3.0);
  CHECK(build_profile(cfg.profile, 64).sigma2(0, 5) > 0.0);
  CHECK(build_profile(cfg.profile, 64).sigma2(0, 6) == 0.0);
  CHECK_THROWS_AS(ExperimentConfig::from(parse("experiment.colour = blue\n")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from(parse("experiment.symmetry = real-ish\n")), ConfigError);
}

TEST_CASE("validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_list = {512, 256};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.identity_n_min = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.dbm_start = "random";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.ensemble.distribution = "cauchy";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config echo excludes threads and output directory") {
  ExperimentConfig a, b;
  b.threads = 7;
  b.output_dir = "elsewhere";
  CHECK(a.to_json() == b.to_json());
  b.seed = 2;
  CHECK(a.to_json() != b.to_json());
  CHECK(a.to_json()["experiment"]["seed"] == 1);
}

TEST_CASE("calibration file parses to the built-in defaults") {
  const auto kv = KeyValueConfig::load(std::string(RMT_SOURCE_DIR) + "/config/calibration.cfg");
  const Calibration from_file = Calibration::from(kv);
  CHECK(from_file.to_json() == Calibration{}.to_json());
  for (const auto& [key, value] : kv.values()) CHECK(key.rfind("calibration.", 0) == 0);
}

TEST_CASE("example configs load") {
  for (const char* name : {"lsc", "lsc_band", "rigidity", "edge", "edge_control", "dbm", "identities"}) {
    CAPTURE(name);
    const auto kv = KeyValueConfig::load(std::string(RMT_SOURCE_DIR) + "/config/examples/" + name + ".cfg");
    CHECK_NOTHROW(ExperimentConfig::from(kv).validate());
  }
}

TEST_CASE("content hash is the git blob hash") {
  CHECK(content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}
