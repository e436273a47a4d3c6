#include "polyel/model.hpp"

#include <cmath>
#include <string>

#include "polyel/rng.hpp"

namespace polyel {

void ModelParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ParameterError("beta must be finite and >= 0, got " + std::to_string(beta));
  }
  if (!(horizon_T > 0.0) || !std::isfinite(horizon_T)) {
    throw ParameterError("horizon T must be finite and > 0");
  }
  if (n_steps < 2) {
    throw ParameterError("n_steps must be >= 2");
  }
  if (!std::isfinite(drift_mu)) {
    throw ParameterError("drift mu must be finite");
  }
  const double d = dt();
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw ParameterError("grid spacing is not positive and finite");
  }
}

TimeGrid make_grid(double horizon_T, std::size_t n_steps) {
  if (!(horizon_T > 0.0) || !std::isfinite(horizon_T)) {
    throw ParameterError("make_grid: horizon must be finite and > 0");
  }
  if (n_steps < 2) {
    throw ParameterError("make_grid: n_steps must be >= 2");
  }
  TimeGrid g;
  g.horizon_ = horizon_T;
  g.n_steps_ = n_steps;
  g.dt_ = horizon_T / static_cast<double>(n_steps);
  if (!(g.dt_ > 0.0)) {
    throw ParameterError("make_grid: grid spacing underflows");
  }
  return g;
}

SeedSpec SeedSpec::child(std::uint64_t index) const {
  return SeedSpec{stream_key(master_seed, stream_index), index};
}

std::pair<double, double> event_thresholds(const ModelParams& params, double c1, double c2) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) {
    throw ParameterError("event_thresholds: c1 and c2 must be > 0");
  }
  const double T = params.horizon_T;
  if (!(T > 1.0)) {
    throw DomainError("event_thresholds: requires T > 1 so that ln T > 0");
  }
  const double lnT = std::log(T);
  return {c1 * T / lnT, c2 * T * std::sqrt(lnT)};
}

}  // namespace polyel
