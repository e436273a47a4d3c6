#include "polyel/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyel/functionals.hpp"
#include "polyel/parallel.hpp"

namespace polyel {

namespace {

void require_replicates(std::size_t m) {
  if (m < 100) {
    throw ParameterError("estimator: need at least 100 replicates");
  }
}

}  // namespace

ImportanceSample draw_importance_sample(const ModelParams& params, double mu, std::size_t m,
                                        const SeedSpec& seed) {
  params.validate();
  require_replicates(m);
  if (!std::isfinite(mu)) {
    throw ParameterError("importance sample: mu must be finite");
  }
  ModelParams drifted = params;
  drifted.drift_mu = mu;
  const double T = params.horizon_T;
  ImportanceSample s;
  s.mu = mu;
  s.log_weights.resize(m);
  s.coulomb.resize(m);
  s.endpoint_x1.resize(m);
  parallel_for(m, [&](std::size_t i) {
    const PathSample path = sample_path(drifted, seed.child(i));
    const double c = coulomb_energy(path);
    const double x = path.endpoint_x1();
    s.coulomb[i] = c;
    s.endpoint_x1[i] = x;
    s.log_weights[i] = -params.beta * c - mu * x + 0.5 * mu * mu * T;
  });
  return s;
}

Estimate z_from_importance(const ImportanceSample& sample, Method method) {
  const std::size_t m = sample.log_weights.size();
  const double hi = *std::max_element(sample.log_weights.begin(), sample.log_weights.end());
  std::vector<double> scaled(m);
  for (std::size_t i = 0; i < m; ++i) {
    scaled[i] = std::exp(sample.log_weights[i] - hi);
  }
  const MeanSe ms = mean_se(scaled);
  double sw = 0.0, sw2 = 0.0;
  for (double w : scaled) {
    sw += w;
    sw2 += w * w;
  }
  const double scale = std::exp(hi);
  Estimate e;
  e.value = scale * ms.mean;
  e.std_error = scale * ms.std_error;
  e.method = method;
  const double weight_ess = sw * sw / sw2;
  e.n_effective = method == Method::naive ? static_cast<double>(m) : std::min(weight_ess, static_cast<double>(m));
  if (weight_ess < 0.01 * static_cast<double>(m)) {
    e.flags.emplace_back("unreliable");
  }
  if (!(e.value > 0.0)) {
    e.flags.emplace_back("underflow");
  }
  return e;
}

Estimate z_naive(const ModelParams& params, std::size_t m, const SeedSpec& seed) {
  if (params.drift_mu != 0.0) {
    throw ParameterError("z_naive: samples must come from the driftless measure");
  }
  return z_from_importance(draw_importance_sample(params, 0.0, m, seed), Method::naive);
}

Estimate z_girsanov(const ModelParams& params, double mu, std::size_t m, const SeedSpec& seed) {
  return z_from_importance(draw_importance_sample(params, mu, m, seed), Method::girsanov);
}

std::vector<double> default_thermo_grid(double beta, std::size_t points) {
  if (!(beta >= 0.0) || points < 1) {
    throw ParameterError("default_thermo_grid: beta >= 0 and at least one point required");
  }
  std::vector<double> g{0.0};
  if (points == 1 || beta == 0.0) {
    return g;
  }
  for (std::size_t k = points - 1; k >= 1; --k) {
    g.push_back(std::ldexp(beta, -static_cast<int>(k - 1)));
  }
  return g;
}

ThermoResult z_thermo(const ModelParams& params, std::span<const double> beta_grid,
                      const McmcConfig& mcmc) {
  params.validate();
  mcmc.validate();
  if (beta_grid.empty() || beta_grid.front() != 0.0) {
    throw ParameterError("z_thermo: the beta grid must start at 0");
  }
  for (std::size_t k = 1; k < beta_grid.size(); ++k) {
    if (!(beta_grid[k] > beta_grid[k - 1])) {
      throw ParameterError("z_thermo: the beta grid must be strictly increasing");
    }
  }
  ThermoResult r;
  r.betas.assign(beta_grid.begin(), beta_grid.end());
  r.log_z.method = Method::thermo;
  r.log_z.log_domain = true;
  const std::size_t K = beta_grid.size();
  if (K == 1) {
    r.integrand = {std::numeric_limits<double>::quiet_NaN()};
    r.integrand_se = {0.0};
    return r;
  }
  r.integrand.resize(K);
  r.integrand_se.resize(K);
  r.chains.resize(K);
  std::vector<double> ess(K);
  parallel_for(K, [&](std::size_t k) {
    ModelParams p = params;
    p.beta = beta_grid[k];
    p.drift_mu = 0.0;
    McmcConfig c = mcmc;
    c.seed = mcmc.seed.child(k);
    const ChainOutput out = run_chain(p, c);
    std::vector<double> energies(out.samples.size());
    std::transform(out.samples.begin(), out.samples.end(), energies.begin(),
                   [](const PathFunctionals& f) { return f.coulomb; });
    const MeanSe ms = mean_se(energies);
    double n_eff = static_cast<double>(energies.size());
    if (energies.size() >= 100) {
      n_eff = effective_sample_size(energies).ess;
    }
    r.integrand[k] = -ms.mean;
    r.integrand_se[k] = ms.std_dev / std::sqrt(n_eff);
    r.chains[k] = out.stats;
    ess[k] = n_eff;
  });

  double log_z = 0.0, var = 0.0;
  std::vector<double> weight(K, 0.0);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double h = beta_grid[k + 1] - beta_grid[k];
    log_z += 0.5 * h * (r.integrand[k] + r.integrand[k + 1]);
    weight[k] += 0.5 * h;
    weight[k + 1] += 0.5 * h;
  }
  for (std::size_t k = 0; k < K; ++k) {
    var += weight[k] * weight[k] * r.integrand_se[k] * r.integrand_se[k];
  }
  // Trapezoid error on [b_k, b_k+1] is h^3 f''/12; f'' from the nearest
  // second divided difference.
  double bias = 0.0;
  if (K >= 3) {
    std::vector<double> second(K - 2);
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const double h0 = beta_grid[k] - beta_grid[k - 1];
      const double h1 = beta_grid[k + 1] - beta_grid[k];
      const double d0 = (r.integrand[k] - r.integrand[k - 1]) / h0;
      const double d1 = (r.integrand[k + 1] - r.integrand[k]) / h1;
      second[k - 1] = 2.0 * (d1 - d0) / (h0 + h1);
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const double h = beta_grid[k + 1] - beta_grid[k];
      const double f2 = second[std::min(k, second.size() - 1)];
      bias += h * h * h * std::abs(f2) / 12.0;
    }
  }
  r.log_z.value = log_z;
  r.log_z.std_error = std::sqrt(var);
  r.log_z.n_effective = *std::min_element(ess.begin(), ess.end());
  r.trapezoid_bias_bound = bias;
  return r;
}

RadiusResult q_mean_radius(const ModelParams& params, const McmcConfig& mcmc,
                           const std::optional<theory::TheoremWindow>& window) {
  const ChainOutput out = run_chain(params, mcmc);
  const std::size_t N = out.samples.size();
  if (N == 0) {
    throw ParameterError("q_mean_radius: the chain retained no samples");
  }
  std::vector<double> rg(N), rg2(N);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < N; ++i) {
    rg[i] = out.samples[i].rg;
    rg2[i] = rg[i] * rg[i];
    if (window && window->contains(rg[i])) {
      ++inside;
    }
  }
  RadiusResult r;
  r.retained = N;
  r.stats = out.stats;
  const double ess = std::max(1.0, out.stats.ess);
  const MeanSe a = mean_se(rg);
  r.mean_radius = {a.mean, a.std_dev / std::sqrt(ess), ess, Method::mcmc, false, {}};
  double ess2 = static_cast<double>(N);
  if (N >= 100) {
    ess2 = std::max(1.0, effective_sample_size(rg2).ess);
  }
  const MeanSe b = mean_se(rg2);
  r.mean_radius_sq = {b.mean, b.std_dev / std::sqrt(ess2), ess2, Method::mcmc, false, {}};
  if (out.stats.ess < 200.0) {
    r.mean_radius.flags.emplace_back("low_ess");
  }
  r.window_fraction = window ? static_cast<double>(inside) / static_cast<double>(N)
                             : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<PathFunctionals> sample_prior_functionals(const ModelParams& params, std::size_t m,
                                                      const SeedSpec& seed) {
  params.validate();
  std::vector<PathFunctionals> out(m);
  parallel_for(m, [&](std::size_t i) { out[i] = evaluate(sample_path(params, seed.child(i))); });
  return out;
}

Estimate tail_probability(const ModelParams& params, double lambda, std::size_t m, const SeedSpec& seed) {
  params.validate();
  require_replicates(m);
  const double level = lambda * std::sqrt(params.horizon_T);
  std::vector<double> hit(m);
  parallel_for(m, [&](std::size_t i) {
    const PathSample path = sample_path(params, seed.child(i));
    double peak = 0.0;
    for (double x : path.xs()) {
      peak = std::max(peak, std::abs(x));
    }
    hit[i] = peak > level ? 1.0 : 0.0;
  });
  const MeanSe ms = mean_se(hit);
  return {ms.mean, ms.std_error, static_cast<double>(m), Method::direct, false, {}};
}

double tail_bound(double lambda) { return 4.0 * normal_upper_tail(lambda); }

Estimate prior_event_weight(const ModelParams& params, const EventPredicate& pred, std::size_t m,
                            const SeedSpec& seed) {
  require_replicates(m);
  const std::vector<PathFunctionals> f = sample_prior_functionals(params, m, seed);
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    v[i] = pred(f[i].rg) ? std::exp(-params.beta * f[i].coulomb) : 0.0;
  }
  const MeanSe ms = mean_se(v);
  return {ms.mean, ms.std_error, static_cast<double>(m), Method::naive, false, {}};
}

}  // namespace polyel
