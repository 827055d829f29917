#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rmt {

using Cell = std::variant<std::int64_t, double, std::string>;

/// One CSV file. Doubles are written with 17 significant digits so the text
/// round-trips and identical runs give identical bytes.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// A named pass/fail verdict with the measured value and its threshold.
struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;

  bool all_passed() const;
  const Table& table(const std::string& name) const;
  const Check* check(const std::string& name) const;
  nlohmann::json to_json() const;
};

void write_csv(std::ostream& out, const Table& t);
std::string csv_field(const std::string& s);

/// Writes <experiment>_<table>.csv for every table and <experiment>.json into
/// `dir` (created if needed); returns the written paths.
std::vector<std::filesystem::path> write_report(const ExperimentReport& r, const std::filesystem::path& dir);

/// "PASS name: detail" / "FAIL name: detail"
std::string verdict_line(const Check& c);

}  // namespace rmt
