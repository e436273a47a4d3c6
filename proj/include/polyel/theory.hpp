#pragma once

#include <cstddef>

#include "polyel/model.hpp"
#include "polyel/stats.hpp"

namespace polyel::theory {

// Every bound_* has a log_bound_* twin evaluated without exponentiating, for
// horizons where the bound itself underflows.

/// Small-radius constant c1 used by default in bounds and windows.
inline constexpr double kDefaultC1 = 1.0 / 3.0;

/// Default large-radius constant c2 = 7 sqrt(beta).
double default_c2(double beta);

/// Expected inverse distance of a drifted Brownian point,
/// E[1 / |B_u + u e1|] = erf(sqrt(u/2)) / u. Requires u > 0.
double phi(double u);

/// min{ sqrt(2/(pi u)), 1/u }, an upper bound on phi; branches meet at u = pi/2.
double phi_bound(double u);

/// Mean of 1/|Z| over m draws Z ~ N(u e1, u I3). Requires u > 0, m >= 100.
Estimate phi_monte_carlo(double u, std::size_t m, const SeedSpec& seed);

struct I1Result {
  double exact = 0.0;        // 2 int_0^T (T - u) phi(u) du
  double outer_style = 0.0;  // T int_0^T phi(u) du
  double abs_error = 0.0;    // quadrature error estimate of `exact`
};

/// Drifted expected Coulomb energy I1(T) by adaptive quadrature after u = v^2.
I1Result i1_exact(double T);

/// 2 T sqrt(2/pi) + T ln T: the intermediate closed bound on T int phi.
double i1_chain_bound(double T);

/// 2 * i1_chain_bound(T): the same bound with the double integral's factor 2.
double i1_audited_bound(double T);

/// 2 T ln T. Requires T > e^2.
double i1_literal_bound(double T);

/// exp(-beta T ln T / c1). Requires T > 1, beta > 0, c1 > 0.
double bound_p_less(double T, double beta, double c1);
double log_bound_p_less(double T, double beta, double c1);

/// (24 / c2) exp(-c2^2 T ln T / 24). Requires T > e, c2 > 0.
double bound_p_greater(double T, double c2);
double log_bound_p_greater(double T, double c2);

/// exp(-2 beta T ln T - T/2). Requires T > e^2, beta > 0.
double bound_z_lower(double T, double beta);
double log_bound_z_lower(double T, double beta);

/// exp(-4 beta T ln T - T/2): the Z lower bound built on i1_audited_bound
/// (valid since 2 T sqrt(2/pi) <= T ln T for T > e^2).
double bound_z_lower_audited(double T, double beta);
double log_bound_z_lower_audited(double T, double beta);

/// exp((2 - 1/c1) beta T ln T). Requires T > e^2.
double bound_q_less(double T, double beta, double c1 = kDefaultC1);
double log_bound_q_less(double T, double beta, double c1 = kDefaultC1);

/// (24/c2) exp(2 beta T ln T + T/2 - c2^2 T ln T / 24). Requires T > e^2.
/// A non-positive c2 selects the default 7 sqrt(beta).
double bound_q_greater(double T, double beta, double c2 = 0.0);
double log_bound_q_greater(double T, double beta, double c2 = 0.0);

/// First-order expansion 1 - beta (8/3) sqrt(2/pi) T^{3/2}.
double small_beta_z(double T, double beta);

/// (8/3) sqrt(2/pi): E[int int 1/|B_t - B_s|] / T^{3/2} under the Wiener measure.
double prior_coulomb_coefficient();

struct TheoremWindow {
  double T = 0.0;
  double beta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool valid = false;  // T > e^2

  bool contains(double radius) const { return low <= radius && radius <= high; }
};

/// Radius window [c1 T / ln T, c2 T sqrt(ln T)]. Requires T > 1, beta > 0.
/// A non-positive c2 selects the default 7 sqrt(beta).
TheoremWindow window(double T, double beta, double c1 = kDefaultC1, double c2 = 0.0);

}  // namespace polyel::theory
