#include "polyel/theory.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "polyel/rng.hpp"

namespace polyel::theory {

namespace {

constexpr double kE2 = std::numbers::e * std::numbers::e;

void require(bool ok, const char* what) {
  if (!ok) {
    throw DomainError(what);
  }
}

// erf(v / sqrt 2) / v, continuous at v = 0.
double erf_ratio(double v) {
  if (v < 1e-8) {
    return std::sqrt(2.0 / std::numbers::pi) * (1.0 - v * v / 6.0);
  }
  return std::erf(v / std::numbers::sqrt2) / v;
}

}  // namespace

double default_c2(double beta) { return 7.0 * std::sqrt(beta); }

double phi(double u) {
  require(u > 0.0, "phi: requires u > 0");
  return std::erf(std::sqrt(0.5 * u)) / u;
}

double phi_bound(double u) {
  require(u > 0.0, "phi_bound: requires u > 0");
  return std::min(std::sqrt(2.0 / (std::numbers::pi * u)), 1.0 / u);
}

Estimate phi_monte_carlo(double u, std::size_t m, const SeedSpec& seed) {
  require(u > 0.0, "phi_monte_carlo: requires u > 0");
  if (m < 100) {
    throw ParameterError("phi_monte_carlo: requires m >= 100");
  }
  Rng rng(seed);
  const double sd = std::sqrt(u);
  std::vector<double> vals(m);
  for (double& v : vals) {
    const double x = u + sd * rng.normal();
    const double y = sd * rng.normal();
    const double z = sd * rng.normal();
    v = 1.0 / std::sqrt((x * x + y * y) + z * z);
  }
  const MeanSe ms = mean_se(vals);
  Estimate e;
  e.value = ms.mean;
  e.std_error = ms.std_error;
  e.n_effective = static_cast<double>(m);
  e.method = Method::direct;
  return e;
}

I1Result i1_exact(double T) {
  require(T > 0.0, "i1_exact: requires T > 0");
  using boost::math::quadrature::gauss_kronrod;
  const double root = std::sqrt(T);
  // u = v^2: int_0^T g(u) phi(u) du = 2 int_0^sqrtT g(v^2) erf(v/sqrt2)/v dv.
  double err_exact = 0.0, err_style = 0.0;
  const double exact = gauss_kronrod<double, 31>::integrate(
      [T](double v) { return 4.0 * (T - v * v) * erf_ratio(v); }, 0.0, root, 30, 1e-12, &err_exact);
  const double inner = gauss_kronrod<double, 31>::integrate(
      [](double v) { return 2.0 * erf_ratio(v); }, 0.0, root, 30, 1e-12, &err_style);
  I1Result r;
  r.exact = exact;
  r.outer_style = T * inner;
  r.abs_error = err_exact;
  return r;
}

double i1_chain_bound(double T) {
  require(T > 0.0, "i1_chain_bound: requires T > 0");
  return 2.0 * T * std::sqrt(2.0 / std::numbers::pi) + T * std::log(T);
}

double i1_audited_bound(double T) { return 2.0 * i1_chain_bound(T); }

double i1_literal_bound(double T) {
  require(T > kE2, "i1_literal_bound: requires T > e^2");
  return 2.0 * T * std::log(T);
}

double log_bound_p_less(double T, double beta, double c1) {
  require(T > 1.0, "bound_p_less: requires T > 1");
  require(beta > 0.0 && c1 > 0.0, "bound_p_less: requires beta > 0 and c1 > 0");
  return -beta * T * std::log(T) / c1;
}

double bound_p_less(double T, double beta, double c1) { return std::exp(log_bound_p_less(T, beta, c1)); }

namespace {

double p_greater_exponent(double T, double c2) {
  require(T > std::numbers::e, "bound_p_greater: requires T > e");
  require(c2 > 0.0, "bound_p_greater: requires c2 > 0");
  return -c2 * c2 * T * std::log(T) / 24.0;
}

double q_greater_exponent(double T, double beta, double& c2) {
  require(T > kE2, "bound_q_greater: requires T > e^2");
  require(beta > 0.0, "bound_q_greater: requires beta > 0");
  if (!(c2 > 0.0)) {
    c2 = default_c2(beta);
  }
  const double tl = T * std::log(T);
  return 2.0 * beta * tl + 0.5 * T - c2 * c2 * tl / 24.0;
}

}  // namespace

double log_bound_p_greater(double T, double c2) { return std::log(24.0 / c2) + p_greater_exponent(T, c2); }

double bound_p_greater(double T, double c2) { return (24.0 / c2) * std::exp(p_greater_exponent(T, c2)); }

double log_bound_z_lower(double T, double beta) {
  require(T > kE2, "bound_z_lower: requires T > e^2");
  require(beta > 0.0, "bound_z_lower: requires beta > 0");
  return -2.0 * beta * T * std::log(T) - 0.5 * T;
}

double bound_z_lower(double T, double beta) { return std::exp(log_bound_z_lower(T, beta)); }

double log_bound_z_lower_audited(double T, double beta) {
  require(T > kE2, "bound_z_lower_audited: requires T > e^2");
  require(beta > 0.0, "bound_z_lower_audited: requires beta > 0");
  return -4.0 * beta * T * std::log(T) - 0.5 * T;
}

double bound_z_lower_audited(double T, double beta) { return std::exp(log_bound_z_lower_audited(T, beta)); }

double log_bound_q_less(double T, double beta, double c1) {
  require(T > kE2, "bound_q_less: requires T > e^2");
  require(beta > 0.0 && c1 > 0.0, "bound_q_less: requires beta > 0 and c1 > 0");
  return (2.0 - 1.0 / c1) * beta * T * std::log(T);
}

double bound_q_less(double T, double beta, double c1) { return std::exp(log_bound_q_less(T, beta, c1)); }

double log_bound_q_greater(double T, double beta, double c2) {
  const double e = q_greater_exponent(T, beta, c2);
  return std::log(24.0 / c2) + e;
}

double bound_q_greater(double T, double beta, double c2) {
  const double e = q_greater_exponent(T, beta, c2);
  return (24.0 / c2) * std::exp(e);
}

double prior_coulomb_coefficient() { return 8.0 / 3.0 * std::sqrt(2.0 / std::numbers::pi); }

double small_beta_z(double T, double beta) {
  require(T > 0.0, "small_beta_z: requires T > 0");
  require(beta >= 0.0, "small_beta_z: requires beta >= 0");
  return 1.0 - beta * prior_coulomb_coefficient() * T * std::sqrt(T);
}

TheoremWindow window(double T, double beta, double c1, double c2) {
  require(T > 1.0, "window: requires T > 1");
  require(beta > 0.0, "window: requires beta > 0");
  require(c1 > 0.0, "window: requires c1 > 0");
  if (!(c2 > 0.0)) {
    c2 = default_c2(beta);
  }
  const double lnT = std::log(T);
  TheoremWindow w;
  w.T = T;
  w.beta = beta;
  w.c1 = c1;
  w.c2 = c2;
  w.low = c1 * T / lnT;
  w.high = c2 * T * std::sqrt(lnT);
  w.valid = T > kE2;
  return w;
}

}  // namespace polyel::theory
