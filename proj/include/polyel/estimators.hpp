#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polyel/mcmc.hpp"
#include "polyel/model.hpp"
#include "polyel/stats.hpp"
#include "polyel/theory.hpp"

namespace polyel {

/// Per-path quantities of an importance sample drawn with drift mu:
/// log_weight = -beta C - mu x_T + mu^2 T / 2.
struct ImportanceSample {
  double mu = 0.0;
  std::vector<double> log_weights;
  std::vector<double> coulomb;
  std::vector<double> endpoint_x1;
};

/// m paths with drift mu; replicate i uses stream seed.child(i).
ImportanceSample draw_importance_sample(const ModelParams& params, double mu, std::size_t m,
                                        const SeedSpec& seed);

/// Mean of exp(-beta C) over m prior paths. Requires drift_mu == 0, m >= 100.
Estimate z_naive(const ModelParams& params, std::size_t m, const SeedSpec& seed);

/// Partition function from paths drifted by mu along e1, reweighted by the
/// exact discrete likelihood ratio. mu = 0 reproduces z_naive bit for bit.
/// Flags "unreliable" when the weight ESS is below 1% of m.
Estimate z_girsanov(const ModelParams& params, double mu, std::size_t m, const SeedSpec& seed);

/// Estimate from an already drawn importance sample.
Estimate z_from_importance(const ImportanceSample& sample, Method method);

struct ThermoResult {
  Estimate log_z;                     // log_domain
  std::vector<double> betas;
  std::vector<double> integrand;      // -E_beta[C]
  std::vector<double> integrand_se;
  std::vector<ChainStats> chains;
  double trapezoid_bias_bound = 0.0;  // from second divided differences
};

/// log Z at beta_grid.back() by trapezoid integration of d log Z / d beta = -E_beta[C].
/// Node k runs a chain on stream mcmc.seed.child(k).
ThermoResult z_thermo(const ModelParams& params, std::span<const double> beta_grid,
                      const McmcConfig& mcmc);

/// {0, beta 2^-(points-2), ..., beta/2, beta}: refined geometrically toward 0.
std::vector<double> default_thermo_grid(double beta, std::size_t points);

struct RadiusResult {
  Estimate mean_radius;     // iact-corrected MCMC standard error
  Estimate mean_radius_sq;
  double window_fraction = 0.0;  // NaN without a window
  std::size_t retained = 0;
  ChainStats stats;
};

/// E_Q[R] from one chain, plus the fraction of retained samples inside `window`.
RadiusResult q_mean_radius(const ModelParams& params, const McmcConfig& mcmc,
                           const std::optional<theory::TheoremWindow>& window = std::nullopt);

/// P(max_i |x1_i| > lambda sqrt(T)) over m prior paths (drift from params).
Estimate tail_probability(const ModelParams& params, double lambda, std::size_t m, const SeedSpec& seed);

/// 4 (1 - Phi(lambda)): reflection-principle bound on the tail above.
double tail_bound(double lambda);

/// Unnormalized E^P[exp(-beta C) 1{pred(R)}] over m prior paths.
Estimate prior_event_weight(const ModelParams& params, const EventPredicate& pred, std::size_t m,
                            const SeedSpec& seed);

/// Functionals of m prior paths (replicate i on seed.child(i)).
std::vector<PathFunctionals> sample_prior_functionals(const ModelParams& params, std::size_t m,
                                                      const SeedSpec& seed);

}  // namespace polyel
