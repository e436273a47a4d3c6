#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "polyel/model.hpp"
#include "polyel/stats.hpp"

namespace polyel {

/// Exit statuses shared by the CLI and the harness.
enum ExitStatus : int { kExitOk = 0, kExitInvalid = 1, kExitCellFailure = 2, kExitConsistency = 3 };

using Cell = std::variant<double, std::int64_t, std::string, bool>;

/// Doubles print with 17 significant digits; NaN prints as "nan".
std::string format_cell(const Cell& c);
std::string format_double(double v);

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
  bool fatal = false;  // a failed fatal check counts as a cell failure
};

/// Tabular result of one experiment. The payload (everything except
/// wall_clock_s) is a pure function of the config and master seed.
struct ExperimentReport {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<Check> checks;
  std::size_t cell_failures = 0;
  bool consistency_failure = false;
  nlohmann::json provenance = nlohmann::json::object();
  double wall_clock_s = 0.0;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view col) const;
  void add_check(std::string name, bool passed, std::string detail, bool fatal);

  nlohmann::json to_json() const;
  std::string to_csv() const;
  std::string checks_csv() const;
  /// Whitespace-separated table with a '#' header, for plotting tools.
  std::string to_dat() const;

  /// Writes <kind>.<format>, <kind>_checks.csv, <kind>.dat and <kind>.meta.json
  /// (the last one carries the wall clock).
  void write(const std::filesystem::path& dir, std::string_view format) const;

  int exit_status() const;
};

/// {method, T, n, beta, mu, value, log_domain, std_error, n_effective, flags}.
nlohmann::json estimate_record(const Estimate& e, const ModelParams& params, double mu);

}  // namespace polyel
