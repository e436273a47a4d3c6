#include "polyel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyel/error.hpp"

namespace polyel {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::naive:
      return "naive";
    case Method::girsanov:
      return "girsanov";
    case Method::thermo:
      return "thermo";
    case Method::mcmc:
      return "mcmc";
    case Method::reweighted:
      return "reweighted";
    case Method::direct:
      return "direct";
  }
  return "unknown";
}

bool Estimate::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  const std::size_t n = xs.size();
  if (n == 0) {
    return r;
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  r.mean = sum / static_cast<double>(n);
  if (n < 2) {
    return r;
  }
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - r.mean;
    ss += d * d;
  }
  r.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
  r.std_error = r.std_dev / std::sqrt(static_cast<double>(n));
  return r;
}

AutocorrResult effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) {
    throw ParameterError("effective_sample_size: need at least 100 values");
  }
  double mean = 0.0;
  for (double x : series) {
    mean += x;
  }
  mean /= static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = series[i] - mean;
  }
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      s += c[i] * c[i + lag];
    }
    return s / static_cast<double>(n);
  };

  AutocorrResult r;
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) {
    r.degenerate = true;
    r.iact = static_cast<double>(n) / 2.0;
    r.ess = 1.0;
    return r;
  }
  // Sum of Gamma_m = gamma_{2m} + gamma_{2m+1} while positive.
  double sum_pairs = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < n / 2; ++m) {
    const double g = autocov(2 * m) + autocov(2 * m + 1);
    if (!(g > 0.0)) {
      break;
    }
    sum_pairs += g;
  }
  r.iact = std::max(0.5, sum_pairs / gamma0 - 0.5);
  r.ess = std::min(static_cast<double>(n), static_cast<double>(n) / (2.0 * r.iact));
  return r;
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(hi)) {
    return hi;
  }
  double s = 0.0;
  for (double x : xs) {
    s += std::exp(x - hi);
  }
  return hi + std::log(s);
}

WeightedMean weighted_mean(std::span<const double> log_weights, std::span<const double> values) {
  if (log_weights.size() != values.size() || values.empty()) {
    throw ParameterError("weighted_mean: need equal, nonempty inputs");
  }
  const double hi = *std::max_element(log_weights.begin(), log_weights.end());
  double sw = 0.0, sw2 = 0.0, swf = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::exp(log_weights[i] - hi);
    sw += w;
    sw2 += w * w;
    swf += w * values[i];
  }
  WeightedMean r;
  r.value = swf / sw;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::exp(log_weights[i] - hi) / sw;
    const double d = values[i] - r.value;
    var += w * w * d * d;
  }
  r.std_error = std::sqrt(var);
  r.weight_ess = sw * sw / sw2;
  return r;
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double z_score(double a, double se_a, double b, double se_b) {
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  if (se == 0.0) {
    return a == b ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), a - b);
  }
  return (a - b) / se;
}

}  // namespace polyel
