#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rmt/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rmtlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = rmt::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rmtlab_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage errors exit with 64") {
  CHECK(invoke({}).code == 64);
  CHECK(invoke({}).err.find("Usage") != std::string::npos);
  CHECK(invoke({"lsc", "--bogus"}).code == 64);
  CHECK(invoke({"unknown-subcommand"}).code == 64);
  CHECK(invoke({"lsc", "--config", "/nonexistent/rmtlab.cfg"}).code == 64);
  CHECK(invoke({"lsc", "--set", "experiment.colour=blue"}).code == 64);
  CHECK(invoke({"lsc", "--set", "noequals"}).code == 64);
  CHECK(invoke({"identities", "--n", "3"}).code == 64);
}

TEST_CASE("help lists every flag with its default") {
  const auto r = invoke({"--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--config", "--seed", "--out", "--samples", "--n", "--quiet", "--threads", "--calibration"}) {
    CAPTURE(flag);
    CHECK(r.out.find(flag) != std::string::npos);
  }
  CHECK(r.out.find("[100]") != std::string::npos);
  CHECK(r.out.find("[256]") != std::string::npos);
}

TEST_CASE("identities example exits 0 and prints residuals") {
  const auto dir = scratch("identities");
  const auto r = invoke({"identities", "--n", "12", "--samples", "200", "--seed", "7", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("max_ward") != std::string::npos);
  CHECK(r.out.find("PASS identities.off_diagonal") != std::string::npos);
  CHECK(fs::exists(dir / "identities_trials.csv"));
  CHECK(fs::exists(dir / "identities.json"));
  fs::remove_all(dir);
}

TEST_CASE("gamma table example") {
  const auto dir = scratch("gamma");
  CHECK(invoke({"gamma-table", "--n", "10", "--out", dir.string(), "--quiet"}).code == 0);
  const std::string csv = slurp(dir / "gamma-table_gamma.csv");
  CHECK(csv.substr(0, 12) == "n,j,gamma\r\n1");
  CHECK(csv.find("10,10,2\r\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("failed checks exit with 2, execution errors with 1") {
  const auto dir = scratch("codes");
  const auto failed = invoke({"identities", "--samples", "5", "--set", "calibration.identity_tolerance=1e-30", "--out",
                              dir.string()});
  CHECK(failed.code == 2);
  CHECK(failed.out.find("FAIL identities.") != std::string::npos);
  const auto crashed = invoke({"dbm-relax", "--n", "20", "--samples", "2", "--out", dir.string()});
  CHECK(crashed.code == 1);
  CHECK(crashed.err.find("error:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("flags override the config file and the seed is echoed") {
  const auto dir = scratch("override");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "experiment.n = 32\nexperiment.samples = 3\nexperiment.seed = 5\n";
  }
  const auto r = invoke({"counting", "--config", (dir / "run.cfg").string(), "--seed", "9", "--out", (dir / "o").string()});
  CHECK(r.code == 0);
  std::ifstream js(dir / "o" / "counting.json");
  const std::string text((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"seed\": 9") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("check-profile writes the variance matrix") {
  const auto dir = scratch("profile");
  const auto r = invoke({"check-profile", "--n", "12", "--set", "profile.kind=band", "--set", "profile.bandwidth=3",
                         "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "check-profile_sigma2_N12.txt"));
  fs::remove_all(dir);
}

TEST_CASE("identical invocations give identical files regardless of threads") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  CHECK(invoke({"lsc", "--n", "48", "--samples", "4", "--threads", "1", "--out", a.string(), "--quiet"}).code == 0);
  CHECK(invoke({"lsc", "--n", "48", "--samples", "4", "--threads", "3", "--out", b.string(), "--quiet"}).code == 0);
  for (const char* f : {"lsc_samples.csv", "lsc_summary.csv", "lsc_slopes.csv", "lsc.json"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}
