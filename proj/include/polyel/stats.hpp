#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polyel {

enum class Method { naive, girsanov, thermo, mcmc, reweighted, direct };

std::string_view to_string(Method m);

/// A Monte Carlo estimate. When `log_domain` is set, `value` is a logarithm
/// and `std_error` is the standard error of that logarithm.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double n_effective = 0.0;
  Method method = Method::direct;
  bool log_domain = false;
  std::vector<std::string> flags;

  bool has_flag(std::string_view f) const;
};

struct MeanSe {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n - 1)
  double std_error = 0.0;
};

/// Two-pass mean and standard error of i.i.d. samples.
MeanSe mean_se(std::span<const double> xs);

struct AutocorrResult {
  double iact = 0.5;
  double ess = 0.0;
  bool degenerate = false;
};

/// Integrated autocorrelation time tau = 1/2 + sum_{k>=1} rho_k, truncated by
/// Geyer's initial positive sequence rule; ess = length / (2 tau).
/// tau is floored at 1/2. A constant series is flagged degenerate with
/// tau = length / 2. Requires length >= 100.
AutocorrResult effective_sample_size(std::span<const double> series);

/// log(sum exp(x_i)), stable for any magnitudes.
double log_sum_exp(std::span<const double> xs);

/// Self-normalized weighted mean sum w_i f_i / sum w_i from log-weights, with
/// delta-method standard error and the normalized weight ESS (sum w)^2/sum w^2.
struct WeightedMean {
  double value = 0.0;
  double std_error = 0.0;
  double weight_ess = 0.0;
};
WeightedMean weighted_mean(std::span<const double> log_weights, std::span<const double> values);

/// Upper tail 1 - Phi(x) of the standard normal.
double normal_upper_tail(double x);

/// Combined-standard-error z score (a - b) / sqrt(se_a^2 + se_b^2); 0 when both SE vanish and a == b.
double z_score(double a, double se_a, double b, double se_b);

}  // namespace polyel
