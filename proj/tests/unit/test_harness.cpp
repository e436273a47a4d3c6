#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "polyel/harness.hpp"
#include "polyel/parallel.hpp"

using namespace polyel;
using nlohmann::json;

namespace {

json load(const std::string& name) {
  std::ifstream in(std::string(POLYEL_FIXTURES_DIR) + "/configs/" + name);
  REQUIRE(in);
  return json::parse(in);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
      cells.emplace_back();
    }
    rows.push_back(cells);
  }
  return rows;
}

struct WorkerGuard {
  int saved = worker_count();
  ~WorkerGuard() { set_worker_count(saved); }
};

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = ExperimentConfig::from_json(load("z_compare.json"));
  CHECK(c.kind == ExperimentKind::z_compare);
  CHECK(c.T_list == std::vector<double>{1.0});
  CHECK(c.n_rule.mode == NRule::Mode::fixed_n);
  CHECK(c.n_rule.n_for(123.0) == 32);
  CHECK(c.mcmc.n_sweeps == 3000);
  CHECK(c.master_seed == 9);

  // to_json -> from_json is the identity on the document.
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  json j = load("z_compare.json");
  j["typo_field"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("z_compare.json");
  j["mcmc"]["sweeps"] = 10;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("z_compare.json");
  j["replicates"] = "many";
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("z_compare.json");
  j["replicates"] = -5;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("z_compare.json");
  j.erase("kind");
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("z_compare.json");
  j["kind"] = "nope";
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("scaling.json");
  j["T_list"] = {4.0, 2.0};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);
  j = load("scaling.json");
  j["n_rule"] = {{"mode", "fixed_dt"}, {"dt", 10.0}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ParameterError);

  NRule r;
  r.dt = 1.0 / 32.0;
  CHECK(r.n_for(4.0) == 128);
  CHECK(r.n_for(32.0) == 1024);
}

TEST_CASE("kernel_check report") {
  const ExperimentReport rep = run_experiment(ExperimentConfig::from_json(load("kernel_check.json")));
  CHECK(rep.exit_status() == kExitOk);
  REQUIRE(rep.rows.size() == 4);
  CHECK(std::abs(rep.number(1, "phi_mc") - 0.68268949213708590) <= 3.0 * rep.number(1, "phi_mc_se"));
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep.number(i, "phi_le_bound") == 1.0);
  }
  // u = pi/2: both branches give 2/pi.
  CHECK(rep.number(2, "phi_bound") == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("bound_check report") {
  json j = load("bound_check.json");
  j["beta_list"] = {0.0, 1.0};
  const ExperimentReport rep = run_experiment(ExperimentConfig::from_json(j));
  CHECK(rep.exit_status() == kExitOk);
  REQUIRE(rep.rows.size() == 6);
  // rows: beta-major, T = 4, 10, 100
  const std::size_t t10 = 4;
  CHECK(rep.number(t10, "T") == 10.0);
  CHECK(rep.number(t10, "log_bound_q_less") == doctest::Approx(-23.025850929940457).epsilon(1e-14));
  CHECK(rep.number(t10, "i1_exact_le_audited_bound") == 1.0);
  CHECK(rep.number(t10, "i1_exact_le_literal_bound") == 0.0);
  const std::size_t t4 = 3;
  CHECK(rep.number(t4, "p_greater_hat") <= rep.number(t4, "bound_p_greater") + 3.0 * rep.number(t4, "p_greater_se"));
  // beta = 0 rows are plain prior frequencies.
  CHECK(rep.number(0, "beta") == 0.0);
  CHECK(std::isnan(rep.number(0, "bound_p_less")));
  const double pl = rep.number(0, "p_less_hat");
  CHECK(pl >= 0.0);
  CHECK(pl <= 1.0);
  CHECK(rep.number(0, "p_less_hat") * 500.0 == std::round(rep.number(0, "p_less_hat") * 500.0));
}

TEST_CASE("z_compare and tail_check reports") {
  const ExperimentReport z = run_experiment(ExperimentConfig::from_json(load("z_compare.json")));
  CHECK(z.exit_status() == kExitOk);
  for (std::size_t i = 0; i < z.rows.size(); ++i) {
    if (z.number(i, "beta") == 0.0) {
      const Cell& m = z.rows[i][z.column("method")];
      if (std::get<std::string>(m) != "girsanov" || z.number(i, "mu") == 0.0) {
        CHECK(z.number(i, "value") == 1.0);
        CHECK(z.number(i, "std_error") == 0.0);
      } else {
        CHECK(std::abs(z.number(i, "value") - 1.0) <= 3.0 * z.number(i, "std_error"));
      }
    } else {
      CHECK(std::abs(z.number(i, "z_vs_naive")) <= 3.0);
    }
  }

  const ExperimentReport t = run_experiment(ExperimentConfig::from_json(load("tail_check.json")));
  CHECK(t.exit_status() == kExitOk);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.number(1, "bound") == doctest::Approx(0.091000527792716829).epsilon(1e-14));
  CHECK(t.number(1, "p_hat") <= t.number(1, "bound") + 3.0 * t.number(1, "std_error"));
}

TEST_CASE("scaling report") {
  const ExperimentReport rep = run_experiment(ExperimentConfig::from_json(load("scaling.json")));
  CHECK(rep.exit_status() == kExitOk);
  REQUIRE(rep.rows.size() == 4);
  CHECK(std::isnan(rep.number(0, "window_low")));
  CHECK(rep.number(2, "window_low") == doctest::Approx(1.0 / 3.0 * 2.0 / std::log(2.0)));
  CHECK(rep.number(2, "window_valid") == 0.0);
}

TEST_CASE("reports are reproducible, worker-independent and round-trip") {
  WorkerGuard guard;
  const ExperimentConfig cfg = ExperimentConfig::from_json(load("scaling.json"));
  set_worker_count(1);
  const ExperimentReport a = run_experiment(cfg);
  set_worker_count(3);
  const ExperimentReport b = run_experiment(cfg);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json() == b.to_json());
  CHECK(a.checks_csv() == b.checks_csv());

  const auto rows = parse_csv(a.to_csv());
  REQUIRE(rows.size() == a.rows.size() + 1);
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
      if (const double* d = std::get_if<double>(&a.rows[r][c])) {
        const double back = std::strtod(rows[r + 1][c].c_str(), nullptr);
        if (std::isnan(*d)) {
          CHECK(std::isnan(back));
        } else {
          CHECK(back == *d);
        }
      }
    }
  }
  const json parsed = json::parse(a.to_json().dump());
  CHECK(parsed["records"][1]["mean_R_Q"].get<double>() == a.number(1, "mean_R_Q"));
}

TEST_CASE("report files") {
  const auto dir = std::filesystem::temp_directory_path() / "polyel_report_test";
  std::filesystem::remove_all(dir);
  const ExperimentReport rep = run_experiment(ExperimentConfig::from_json(load("tail_check.json")));
  rep.write(dir, "csv");
  CHECK(std::filesystem::exists(dir / "tail_check.csv"));
  CHECK(std::filesystem::exists(dir / "tail_check_checks.csv"));
  CHECK(std::filesystem::exists(dir / "tail_check.meta.json"));
  std::ifstream dat(dir / "tail_check.dat");
  std::string first, second;
  std::getline(dat, first);
  std::getline(dat, second);
  CHECK(first == "# tail_check");
  CHECK(second.rfind("# T lambda n p_hat", 0) == 0);
  rep.write(dir, "json");
  std::ifstream js(dir / "tail_check.json");
  CHECK_NOTHROW((void)json::parse(js));
  CHECK_THROWS_AS(rep.write(dir, "xml"), ParameterError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cell failures are recorded and set the exit status") {
  json j = load("z_compare.json");
  j["beta_grid"] = {0.0, 0.5};  // does not end at either beta
  const ExperimentReport rep = run_experiment(ExperimentConfig::from_json(j));
  CHECK(rep.cell_failures == 2);
  CHECK(rep.exit_status() == kExitCellFailure);
  CHECK(std::get<std::string>(rep.rows[0].back()).rfind("failed:", 0) == 0);
}
