#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "polyel/path.hpp"
#include "polyel/stats.hpp"

using namespace polyel;

namespace {

ModelParams params(double T, std::size_t n, double mu = 0.0) {
  ModelParams p;
  p.horizon_T = T;
  p.n_steps = n;
  p.drift_mu = mu;
  return p;
}

double dist(const Vec3& a, const Vec3& b) { return std::sqrt((a - b).norm2()); }

bool within(const MeanSe& m, double target, double k = 3.0) { return std::abs(m.mean - target) <= k * m.std_error; }

}  // namespace

TEST_CASE("sample_path endpoint moments") {
  const int m = 10000;
  SUBCASE("driftless endpoint is centred with covariance T I") {
    const ModelParams p = params(1.0, 16);
    std::vector<double> x(m), y(m), z(m), r2(m);
    for (int i = 0; i < m; ++i) {
      const PathSample s = sample_path(p, SeedSpec{11, static_cast<std::uint64_t>(i)});
      const Vec3 e = s.position(s.n_steps());
      x[i] = e.x;
      y[i] = e.y;
      z[i] = e.z;
      r2[i] = e.norm2();
    }
    CHECK(within(mean_se(x), 0.0));
    CHECK(within(mean_se(y), 0.0));
    CHECK(within(mean_se(z), 0.0));
    CHECK(within(mean_se(r2), 3.0));
  }
  SUBCASE("drift moves the first coordinate by mu T") {
    const ModelParams p = params(4.0, 8, 1.0);
    std::vector<double> x(m), y(m);
    for (int i = 0; i < m; ++i) {
      const PathSample s = sample_path(p, SeedSpec{12, static_cast<std::uint64_t>(i)});
      x[i] = s.endpoint_x1();
      y[i] = s.position(8).y;
    }
    CHECK(within(mean_se(x), 4.0));
    CHECK(within(mean_se(y), 0.0));
  }
}

TEST_CASE("sample_path is deterministic and pinned") {
  const ModelParams p = params(2.0, 32);
  const PathSample a = sample_path(p, SeedSpec{5, 1});
  const PathSample b = sample_path(p, SeedSpec{5, 1});
  const PathSample c = sample_path(p, SeedSpec{5, 2});
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.position(0) == Vec3{});
  CHECK(a.node_count() == 33);
  Vec3 acc{};
  for (std::size_t i = 1; i <= 32; ++i) {
    acc += a.increment(i);
    CHECK(acc == a.position(i));
  }
}

TEST_CASE("rotations") {
  Rng rng(SeedSpec{3, 0});
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_rotation(rng);
    CHECK(r.is_proper(1e-12));
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
  Rotation reflect;
  reflect.m = {-1, 0, 0, 0, 1, 0, 0, 0, 1};
  CHECK_FALSE(reflect.is_proper());
  CHECK(Rotation::identity().is_proper(0.0));
  const Rotation q = Rotation::from_quaternion(2.0, 0.0, 0.0, 0.0);
  for (std::size_t k = 0; k < 9; ++k) {
    CHECK(q.m[k] == Rotation::identity().m[k]);
  }
}

TEST_CASE("pivot move") {
  const ModelParams p = params(1.0, 20);
  const PathSample path = sample_path(p, SeedSpec{9, 0});
  Rng rng(SeedSpec{9, 1});

  SUBCASE("identity leaves the path bit-identical") {
    CHECK(apply_pivot(path, 7, Rotation::identity()) == path);
  }
  SUBCASE("k = n has an empty tail") {
    CHECK(apply_pivot(path, 20, random_rotation(rng)) == path);
  }
  SUBCASE("isometry on head and tail") {
    const std::size_t k = 8;
    const PathSample q = apply_pivot(path, k, random_rotation(rng));
    for (std::size_t i = 0; i <= k; ++i) {
      CHECK(q.position(i) == path.position(i));
    }
    for (std::size_t i = k; i <= 20; ++i) {
      for (std::size_t j = k; j <= 20; ++j) {
        CHECK(dist(q.position(i), q.position(j)) == doctest::Approx(dist(path.position(i), path.position(j))).epsilon(1e-12));
      }
    }
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(apply_pivot(path, 0, Rotation::identity()), ParameterError);
    CHECK_THROWS_AS(apply_pivot(path, 21, Rotation::identity()), ParameterError);
    Rotation scaled;
    scaled.m = {2, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK_THROWS_AS(apply_pivot(path, 3, scaled), ParameterError);
  }
}

TEST_CASE("global autoregressive move") {
  const ModelParams p = params(1.0, 16);
  const double dt = p.dt();
  const int m = 10000;

  SUBCASE("near-zero step barely moves the path") {
    const PathSample path = sample_path(p, SeedSpec{1, 0});
    const PathSample q = apply_global_autoregressive(path, 1e-9, SeedSpec{1, 1}, p);
    double sup = 0.0;
    for (std::size_t i = 0; i <= 16; ++i) {
      sup = std::max(sup, std::sqrt((q.position(i) - path.position(i)).norm2()));
    }
    CHECK(sup < 1e-6);
  }

  for (double s : {1.0, 0.5, 0.1}) {
    CAPTURE(s);
    std::vector<double> x(m), xx(m), xy(m), zz(m);
    for (int i = 0; i < m; ++i) {
      const PathSample path = sample_path(p, SeedSpec{2, static_cast<std::uint64_t>(i)});
      const PathSample q = apply_global_autoregressive(path, s, SeedSpec{3, static_cast<std::uint64_t>(i)}, p);
      const Vec3 d = q.increment(5);
      x[i] = d.x;
      xx[i] = d.x * d.x;
      xy[i] = d.x * d.y;
      zz[i] = d.z * d.z;
    }
    CHECK(within(mean_se(x), 0.0));
    CHECK(within(mean_se(xx), dt));
    CHECK(within(mean_se(xy), 0.0));
    CHECK(within(mean_se(zz), dt));
  }

  SUBCASE("drifted prior is preserved around its mean") {
    const ModelParams pd = params(1.0, 16, 2.0);
    std::vector<double> x(m), xx(m);
    for (int i = 0; i < m; ++i) {
      const PathSample path = sample_path(pd, SeedSpec{4, static_cast<std::uint64_t>(i)});
      const PathSample q = apply_global_autoregressive(path, 0.5, SeedSpec{5, static_cast<std::uint64_t>(i)}, pd);
      const double c = q.increment(3).x - 2.0 * dt;
      x[i] = q.increment(3).x;
      xx[i] = c * c;
    }
    CHECK(within(mean_se(x), 2.0 * dt));
    CHECK(within(mean_se(xx), dt));
  }

  const PathSample path = sample_path(p, SeedSpec{1, 0});
  CHECK_THROWS_AS(apply_global_autoregressive(path, 0.0, SeedSpec{1, 1}, p), ParameterError);
  CHECK_THROWS_AS(apply_global_autoregressive(path, 1.5, SeedSpec{1, 1}, p), ParameterError);
}

TEST_CASE("block resample") {
  const ModelParams p = params(1.0, 16);
  const PathSample path = sample_path(p, SeedSpec{6, 0});

  SUBCASE("nodes before the block are untouched") {
    const PathSample q = resample_block(path, 5, 4, SeedSpec{6, 1}, p);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(q.position(i) == path.position(i));
    }
    for (std::size_t i = 9; i <= 16; ++i) {
      CHECK(q.increment(i) == path.increment(i));
    }
    CHECK_FALSE(q.increment(5) == path.increment(5));
  }
  SUBCASE("a full block has the prior law") {
    const int m = 10000;
    std::vector<double> e(m), e2(m);
    for (int i = 0; i < m; ++i) {
      const PathSample q = resample_block(path, 1, 16, SeedSpec{7, static_cast<std::uint64_t>(i)}, p);
      e[i] = q.endpoint_x1();
      e2[i] = q.position(16).norm2();
    }
    CHECK(within(mean_se(e), 0.0));
    CHECK(within(mean_se(e2), 3.0));
  }
  SUBCASE("bad blocks") {
    CHECK_THROWS_AS(resample_block(path, 3, 0, SeedSpec{}, p), ParameterError);
    CHECK_THROWS_AS(resample_block(path, 0, 2, SeedSpec{}, p), ParameterError);
    CHECK_THROWS_AS(resample_block(path, 15, 3, SeedSpec{}, p), ParameterError);
  }
}

TEST_CASE("path CSV round trip is exact") {
  const ModelParams p = params(0.7, 9, 0.3);
  const PathSample path = sample_path(p, SeedSpec{8, 8});
  std::stringstream s;
  write_path_csv(s, path);
  const PathSample back = read_path_csv(s);
  CHECK(back.grid() == path.grid());
  for (std::size_t i = 0; i <= 9; ++i) {
    CHECK(back.position(i) == path.position(i));
  }

  std::stringstream bad("i,t,x,y,z\n0,0,1,0,0\n1,1,2,0,0\n2,2,3,0,0\n");
  CHECK_THROWS_AS(read_path_csv(bad), ParameterError);
  std::stringstream junk("i,t,x,y,z\n0,0,0,0,0\n1,1,abc,0,0\n2,2,3,0,0\n");
  CHECK_THROWS_AS(read_path_csv(junk), ParameterError);
}
