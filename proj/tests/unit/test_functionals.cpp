#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "polyel/functionals.hpp"
#include "polyel/parallel.hpp"
#include "polyel/stats.hpp"

using namespace polyel;

namespace {

PathSample straight_line() {
  const TimeGrid g = make_grid(2.0, 2);
  const std::vector<Vec3> pos{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  return PathSample::from_positions(g, pos);
}

ModelParams params(double T, std::size_t n) {
  ModelParams p;
  p.horizon_T = T;
  p.n_steps = n;
  return p;
}

// Brute force over ordered pairs, in the most direct form.
double coulomb_brute(const PathSample& p) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.node_count(); ++i) {
    for (std::size_t j = 0; j < p.node_count(); ++j) {
      if (i != j) {
        s += 1.0L / std::sqrt(static_cast<long double>((p.position(i) - p.position(j)).norm2()));
      }
    }
  }
  const double dt = p.grid().dt();
  return static_cast<double>(s) * dt * dt;
}

struct WorkerGuard {
  int saved = worker_count();
  ~WorkerGuard() { set_worker_count(saved); }
};

}  // namespace

TEST_CASE("straight-line fixture") {
  const PathSample s = straight_line();
  CHECK(coulomb_energy(s) == 5.0);
  CHECK(radius_gyration_pairwise(s) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(radius_gyration_centered(s) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-15));
  const HolderCheck h = holder_check(s);
  CHECK(h.m2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(h.m_neg1 == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(h.product == doctest::Approx(std::sqrt(2.0) * 5.0 / 6.0).epsilon(1e-15));
  CHECK(log_gibbs_weight(s, 0.0) == 0.0);
  CHECK(log_gibbs_weight(s, 1.0) == -5.0);
  CHECK(log_gibbs_weight(s, 2.0) == -10.0);
  const PathFunctionals f = evaluate(s);
  CHECK(f.coulomb == 5.0);
  CHECK(f.endpoint_x1 == 2.0);
  CHECK(f.clamped_pairs == 0);
  CHECK_THROWS_AS(log_gibbs_weight(s, -1.0), ParameterError);
}

TEST_CASE("two-node view") {
  const std::vector<double> x{0.0, 1.0}, y{0.0, 0.0}, z{0.0, 0.0};
  const NodeView v{x, y, z};
  CHECK(radius_gyration_pairwise(v) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(radius_gyration_centered(v) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(coulomb_energy_diag(v, 1.0).value == 2.0);
}

TEST_CASE("Holder equality on a regular tetrahedron") {
  // All six distances equal sqrt(8).
  const std::vector<double> x{0, 0, -2, -2}, y{0, -2, 0, -2}, z{0, -2, -2, 0};
  const HolderCheck h = holder_check(NodeView{x, y, z});
  CHECK(h.m2 == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(h.product == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Holder invariant on sampled paths") {
  for (std::size_t n : {16u, 64u}) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const PathSample s = sample_path(params(1.0, n), SeedSpec{21, i});
      REQUIRE(holder_check(s).product >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("gyration forms agree and are translation invariant") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::size_t n = 2 + 37 * i % 700;
    const PathSample s = sample_path(params(1.0 + 0.1 * static_cast<double>(i), n), SeedSpec{22, i});
    const double a = radius_gyration_pairwise(s), b = radius_gyration_centered(s);
    REQUIRE(std::abs(a - b) <= 1e-10 * a);
  }
  const PathSample s = sample_path(params(3.0, 50), SeedSpec{23, 0});
  std::vector<double> x(s.xs().begin(), s.xs().end()), y(s.ys().begin(), s.ys().end()),
      z(s.zs().begin(), s.zs().end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] += 1e3;
    y[i] -= 7.0;
    z[i] += 0.5;
  }
  const NodeView moved{x, y, z};
  CHECK(radius_gyration_centered(moved) == doctest::Approx(radius_gyration_centered(s)).epsilon(1e-10));
  CHECK(radius_gyration_pairwise(moved) == doctest::Approx(radius_gyration_pairwise(s)).epsilon(1e-10));
}

TEST_CASE("coulomb energy matches brute force") {
  for (std::size_t n : {2u, 3u, 31u, 255u, 256u, 257u, 600u}) {
    const PathSample s = sample_path(params(2.0, n), SeedSpec{24, n});
    CHECK(coulomb_energy(s) == doctest::Approx(coulomb_brute(s)).epsilon(1e-12));
  }
}

TEST_CASE("prior mean coulomb energy") {
  // Exact on the grid: E 1/|B_u| = sqrt(2/(pi u)), so
  // E C = dt^2 * 2 * sum_{k=1..n} (n+1-k) sqrt(2/(pi k dt)).
  const std::size_t n = 64;
  const double T = 1.0, dt = T / n;
  double oracle = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    oracle += static_cast<double>(n + 1 - k) * std::sqrt(2.0 / (std::numbers::pi * k * dt));
  }
  oracle *= 2.0 * dt * dt;
  std::vector<double> c(10000);
  for (std::uint64_t i = 0; i < c.size(); ++i) {
    c[i] = coulomb_energy(sample_path(params(T, n), SeedSpec{25, i}));
  }
  const MeanSe m = mean_se(c);
  CHECK(std::abs(m.mean - oracle) <= 3.0 * m.std_error);
  // The continuum value (8/3) sqrt(2/pi) is approached from below.
  CHECK(oracle < 8.0 / 3.0 * std::sqrt(2.0 / std::numbers::pi));
}

TEST_CASE("pivot delta matches full recomputation") {
  Rng rng(SeedSpec{26, 0});
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    const std::size_t n = 8 + trial * 13 % 500;
    const PathSample s = sample_path(params(1.0, n), SeedSpec{26, trial + 1});
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    const Rotation r = random_rotation(rng);
    const double e0 = coulomb_energy(s);
    const double full = coulomb_energy(apply_pivot(s, k, r)) - e0;
    const double delta = coulomb_delta_pivot(s, k, r);
    const double scale = std::max(std::abs(full), 1e-3 * e0);
    REQUIRE(std::abs(delta - full) <= 1e-9 * scale);
  }
  const PathSample s = sample_path(params(1.0, 40), SeedSpec{27, 0});
  CHECK(coulomb_delta_pivot(s, 13, Rotation::identity()) == 0.0);
  CHECK(coulomb_delta_pivot(s, 40, random_rotation(rng)) == 0.0);
}

TEST_CASE("clamping and degenerate paths") {
  const TimeGrid g = make_grid(1.0, 200);
  std::vector<Vec3> inc(200, Vec3{0.01, 0.0, 0.0});
  inc[100] = Vec3{};  // one coincident pair out of 20100
  const EnergyResult e = coulomb_energy_diag(PathSample::from_increments(g, inc));
  CHECK(e.clamped_pairs == 1);
  CHECK(std::isfinite(e.value));
  CHECK(e.value > 2.0 * g.dt() * g.dt() * 1e12);  // the clamped pair alone

  std::vector<Vec3> flat(200, Vec3{});
  CHECK_THROWS_AS(coulomb_energy(PathSample::from_increments(g, flat)), DegeneratePathError);
}

TEST_CASE("energy bits do not depend on the worker count") {
  WorkerGuard guard;
  const PathSample s = sample_path(params(4.0, 3000), SeedSpec{28, 0});
  set_worker_count(1);
  const double e1 = coulomb_energy(s);
  const HolderCheck h1 = holder_check(s);
  const double r1 = radius_gyration_pairwise(s);
  set_worker_count(4);
  CHECK(coulomb_energy(s) == e1);
  CHECK(holder_check(s).product == h1.product);
  CHECK(radius_gyration_pairwise(s) == r1);
  set_worker_count(3);
  CHECK(coulomb_energy(s) == e1);
}
