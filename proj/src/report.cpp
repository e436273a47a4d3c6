#include "polyel/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyel/error.hpp"

namespace polyel {

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(bool b) const { return b ? "1" : "0"; }
  };
  return std::visit(Visitor{}, c);
}

namespace {

nlohmann::json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::json operator()(double v) const { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(const std::string& s) const { return s; }
    nlohmann::json operator()(bool b) const { return b; }
  };
  return std::visit(Visitor{}, c);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char ch : s) {
    out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) {
    throw ParameterError("cannot write " + p.string());
  }
  f << text;
}

}  // namespace

std::size_t ExperimentReport::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) {
      return i;
    }
  }
  throw ParameterError("report has no column " + std::string(name));
}

double ExperimentReport::number(std::size_t row, std::string_view col) const {
  const Cell& c = rows.at(row).at(column(col));
  if (const double* d = std::get_if<double>(&c)) {
    return *d;
  }
  if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) {
    return static_cast<double>(*i);
  }
  if (const bool* b = std::get_if<bool>(&c)) {
    return *b ? 1.0 : 0.0;
  }
  return std::nan("");
}

void ExperimentReport::add_check(std::string name, bool passed, std::string detail, bool fatal) {
  if (!passed && fatal) {
    ++cell_failures;
  }
  checks.push_back({std::move(name), passed, std::move(detail), fatal});
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["provenance"] = provenance;
  j["columns"] = columns;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      r[columns[c]] = cell_json(row[c]);
    }
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  nlohmann::json cj = nlohmann::json::array();
  for (const Check& c : checks) {
    cj.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"fatal", c.fatal}});
  }
  j["checks"] = std::move(cj);
  j["cell_failures"] = cell_failures;
  j["consistency_failure"] = consistency_failure;
  return j;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << csv_escape(format_cell(row[c]));
    }
    out << '\n';
  }
  return out.str();
}

std::string ExperimentReport::checks_csv() const {
  std::ostringstream out;
  out << "name,passed,fatal,detail\n";
  for (const Check& c : checks) {
    out << csv_escape(c.name) << ',' << (c.passed ? 1 : 0) << ',' << (c.fatal ? 1 : 0) << ','
        << csv_escape(c.detail) << '\n';
  }
  return out.str();
}

std::string ExperimentReport::to_dat() const {
  std::ostringstream out;
  out << "# " << kind << '\n' << '#';
  for (const std::string& c : columns) {
    out << ' ' << c;
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string s = format_cell(row[c]);
      for (char& ch : s) {
        if (ch == ' ' || ch == '\t') {
          ch = '_';
        }
      }
      out << (c ? " " : "") << (s.empty() ? "-" : s);
    }
    out << '\n';
  }
  return out.str();
}

void ExperimentReport::write(const std::filesystem::path& dir, std::string_view format) const {
  std::filesystem::create_directories(dir);
  if (format == "json") {
    write_file(dir / (kind + ".json"), to_json().dump(2) + "\n");
  } else if (format == "csv") {
    write_file(dir / (kind + ".csv"), to_csv());
  } else {
    throw ParameterError("unknown report format " + std::string(format));
  }
  write_file(dir / (kind + "_checks.csv"), checks_csv());
  write_file(dir / (kind + ".dat"), to_dat());
  nlohmann::json meta{{"kind", kind}, {"wall_clock_s", wall_clock_s}, {"version", POLYEL_VERSION}};
  write_file(dir / (kind + ".meta.json"), meta.dump(2) + "\n");
}

int ExperimentReport::exit_status() const {
  if (consistency_failure) {
    return kExitConsistency;
  }
  return cell_failures > 0 ? kExitCellFailure : kExitOk;
}

nlohmann::json estimate_record(const Estimate& e, const ModelParams& params, double mu) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"method", std::string(to_string(e.method))},
          {"T", params.horizon_T},
          {"n", params.n_steps},
          {"beta", params.beta},
          {"mu", mu},
          {"value", num(e.value)},
          {"log_domain", e.log_domain},
          {"std_error", num(e.std_error)},
          {"n_effective", num(e.n_effective)},
          {"flags", e.flags}};
}

}  // namespace polyel
