#include "rmt/report.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

bool ExperimentReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const Table& ExperimentReport::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw Error(fmt::format("report '{}' has no table '{}'", experiment, name));
}

const Check* ExperimentReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
                           {"detail", c.detail}});
  }
  nlohmann::json tables_json = nlohmann::json::array();
  for (const auto& t : tables) tables_json.push_back({{"name", t.name}, {"rows", t.rows.size()}, {"columns", t.header}});
  return {{"experiment", experiment}, {"config", config},      {"config_hash", config_hash},
          {"summary", summary},       {"checks", checks_json}, {"tables", tables_json},
          {"all_passed", all_passed()}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t k = 0; k < t.header.size(); ++k) out << (k ? "," : "") << csv_field(t.header[k]);
  out << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      std::visit(
          [&out](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              out << fmt::format("{:.17g}", v);
            } else if constexpr (std::is_same_v<V, std::string>) {
              out << csv_field(v);
            } else {
              out << v;
            }
          },
          row[k]);
    }
    out << "\r\n";
  }
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> written;
  for (const auto& t : r.tables) {
    const auto path = dir / fmt::format("{}_{}.csv", r.experiment, t.name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    write_csv(out, t);
    written.push_back(path);
  }
  const auto json_path = dir / fmt::format("{}.json", r.experiment);
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", json_path.string()));
  out << r.to_json().dump(2) << '\n';
  written.push_back(json_path);
  return written;
}

std::string verdict_line(const Check& c) {
  return fmt::format("{} {}: {}", c.passed ? "PASS" : "FAIL", c.name, c.detail);
}

}  // namespace rmt
