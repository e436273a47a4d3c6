#pragma once

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "polyel/mcmc.hpp"
#include "polyel/report.hpp"
#include "polyel/theory.hpp"

namespace polyel {

enum class ExperimentKind { scaling, kernel_check, bound_check, z_compare, tail_check };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view s);

/// Grid size per horizon. `fixed_dt` keeps dt constant across a T sweep
/// (n = round(T / dt)); `fixed_n` uses the same n for every T.
struct NRule {
  enum class Mode { fixed_dt, fixed_n };
  Mode mode = Mode::fixed_dt;
  double dt = 1.0 / 32.0;
  std::size_t n = 256;

  std::size_t n_for(double T) const;
};

/// Mirrors the JSON config document field for field.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::scaling;
  std::vector<double> T_list;
  std::vector<double> beta_list;
  NRule n_rule;
  std::vector<double> mu_list{1.0};
  std::vector<double> u_list;
  std::vector<double> lambda_list;
  std::size_t replicates = 10000;
  McmcConfig mcmc;  // seed is ignored: cells derive theirs from master_seed
  std::vector<double> beta_grid;  // thermodynamic integration; empty = default grid
  std::size_t thermo_points = 3;
  double c1 = theory::kDefaultC1;
  std::optional<double> c2;  // default 7 sqrt(beta)
  double mc_max_T = 16.0;    // bound_check: Monte Carlo only up to this horizon
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  std::string format = "csv";

  /// Throws ParameterError on unknown keys, wrong types or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

nlohmann::json mcmc_to_json(const McmcConfig& c);
McmcConfig mcmc_from_json(const nlohmann::json& j, McmcConfig base = {});

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Mean radius under the penalized chain against the prior, the theorem
/// window and the fraction of samples inside it, per (beta, T).
ExperimentReport run_scaling(const ExperimentConfig& cfg);
/// phi, its bound and a Monte Carlo estimate per u.
ExperimentReport run_kernel_check(const ExperimentConfig& cfg);
/// Every closed-form bound per (T, beta), the I1 audit, Monte Carlo p< and p>.
ExperimentReport run_bound_check(const ExperimentConfig& cfg);
/// Naive, drifted and thermodynamic Z estimates per (T, beta).
ExperimentReport run_z_compare(const ExperimentConfig& cfg);
/// Reflection-principle tail bound against Monte Carlo per (T, lambda).
ExperimentReport run_tail_check(const ExperimentConfig& cfg);

}  // namespace polyel
