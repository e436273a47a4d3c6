#include "polyel/path.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace polyel {

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ParameterError("quaternion must be nonzero and finite");
  }
  w /= norm;
  x /= norm;
  y /= norm;
  z /= norm;
  Rotation r;
  r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
         2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  return r;
}

Rotation Rotation::transpose() const {
  Rotation t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      t.m[3 * r + c] = m[3 * c + r];
    }
  }
  return t;
}

double Rotation::determinant() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool Rotation::is_proper(double tol) const {
  for (double v : m) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) {
        dot += m[3 * k + r] * m[3 * k + c];
      }
      if (std::abs(dot - (r == c ? 1.0 : 0.0)) > tol) {
        return false;
      }
    }
  }
  return std::abs(determinant() - 1.0) <= tol;
}

Rotation random_rotation(Rng& rng) {
  double w = 0, x = 0, y = 0, z = 0, n2 = 0;
  do {
    w = rng.normal();
    x = rng.normal();
    y = rng.normal();
    z = rng.normal();
    n2 = w * w + x * x + y * y + z * z;
  } while (n2 < 1e-300);
  return Rotation::from_quaternion(w, x, y, z);
}

PathSample PathSample::from_increments(const TimeGrid& grid, std::vector<Vec3> increments) {
  if (grid.n_steps() < 2 || increments.size() != grid.n_steps()) {
    throw ParameterError("from_increments: need exactly n_steps increments on a valid grid");
  }
  for (const Vec3& v : increments) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw ParameterError("from_increments: non-finite increment");
    }
  }
  PathSample p;
  p.grid_ = grid;
  p.increments_ = std::move(increments);
  p.x_.assign(grid.node_count(), 0.0);
  p.y_.assign(grid.node_count(), 0.0);
  p.z_.assign(grid.node_count(), 0.0);
  p.rebuild_positions(0);
  return p;
}

PathSample PathSample::from_positions(const TimeGrid& grid, std::span<const Vec3> positions) {
  if (positions.size() != grid.node_count()) {
    throw ParameterError("from_positions: need n_steps + 1 positions");
  }
  if (!(positions[0] == Vec3{})) {
    throw ParameterError("from_positions: the path must start at the origin");
  }
  std::vector<Vec3> inc(grid.n_steps());
  for (std::size_t i = 1; i < positions.size(); ++i) {
    inc[i - 1] = positions[i] - positions[i - 1];
  }
  PathSample p = from_increments(grid, std::move(inc));
  // Keep the given coordinates; prefix sums of the differences can be off by an ulp.
  for (std::size_t i = 0; i < positions.size(); ++i) {
    p.x_[i] = positions[i].x;
    p.y_[i] = positions[i].y;
    p.z_[i] = positions[i].z;
  }
  return p;
}

void PathSample::rebuild_positions(std::size_t from_node) {
  for (std::size_t i = from_node + 1; i < x_.size(); ++i) {
    const Vec3& d = increments_[i - 1];
    x_[i] = x_[i - 1] + d.x;
    y_[i] = y_[i - 1] + d.y;
    z_[i] = z_[i - 1] + d.z;
  }
}

void PathSample::rotate_tail(std::size_t k, const Rotation& rotation) {
  for (std::size_t i = k + 1; i <= n_steps(); ++i) {
    increments_[i - 1] = rotation * increments_[i - 1];
  }
  rebuild_positions(k);
}

namespace {

Vec3 gaussian_increment(Rng& rng, double sd, double mean_x) {
  const double a = rng.normal();
  const double b = rng.normal();
  const double c = rng.normal();
  return {mean_x + sd * a, sd * b, sd * c};
}

}  // namespace

PathSample sample_path(const ModelParams& params, Rng& rng) {
  params.validate();
  const TimeGrid grid = make_grid(params);
  const double dt = grid.dt();
  const double sd = std::sqrt(dt);
  std::vector<Vec3> inc(grid.n_steps());
  for (Vec3& v : inc) {
    v = gaussian_increment(rng, sd, params.drift_mu * dt);
  }
  return PathSample::from_increments(grid, std::move(inc));
}

PathSample sample_path(const ModelParams& params, const SeedSpec& seed) {
  Rng rng(seed);
  return sample_path(params, rng);
}

PathSample apply_pivot(const PathSample& path, std::size_t k, const Rotation& rotation) {
  if (k < 1 || k > path.n_steps()) {
    throw ParameterError("apply_pivot: pivot index must satisfy 1 <= k <= n");
  }
  if (!rotation.is_proper(1e-12)) {
    throw ParameterError("apply_pivot: matrix is not a proper rotation");
  }
  PathSample out = path;
  out.rotate_tail(k, rotation);
  return out;
}

void global_autoregressive_in_place(PathSample& path, double s, Rng& rng, const ModelParams& params) {
  if (!(s > 0.0) || !(s <= 1.0)) {
    throw ParameterError("autoregressive step s must lie in (0, 1]");
  }
  const double dt = path.grid().dt();
  const double sd = std::sqrt(dt);
  const double keep = std::sqrt(1.0 - s * s);
  const double mean_x = params.drift_mu * dt;
  for (std::size_t i = 1; i <= path.n_steps(); ++i) {
    const Vec3 old = path.increment(i);
    const Vec3 zeta = gaussian_increment(rng, sd, 0.0);
    path.set_increment(i, {keep * (old.x - mean_x) + s * zeta.x + mean_x,
                           keep * old.y + s * zeta.y,
                           keep * old.z + s * zeta.z});
  }
  path.rebuild_positions(0);
}

PathSample apply_global_autoregressive(const PathSample& path, double s, const SeedSpec& noise_seed,
                                       const ModelParams& params) {
  PathSample out = path;
  Rng rng(noise_seed);
  global_autoregressive_in_place(out, s, rng, params);
  return out;
}

void resample_block_in_place(PathSample& path, std::size_t i0, std::size_t len, Rng& rng,
                             const ModelParams& params) {
  if (len == 0 || i0 < 1 || i0 + len - 1 > path.n_steps()) {
    throw ParameterError("resample_block: block must be nonempty and inside 1..n");
  }
  const double dt = path.grid().dt();
  const double sd = std::sqrt(dt);
  for (std::size_t i = i0; i < i0 + len; ++i) {
    path.set_increment(i, gaussian_increment(rng, sd, params.drift_mu * dt));
  }
  path.rebuild_positions(i0 - 1);
}

PathSample resample_block(const PathSample& path, std::size_t i0, std::size_t len,
                          const SeedSpec& seed, const ModelParams& params) {
  PathSample out = path;
  Rng rng(seed);
  resample_block_in_place(out, i0, len, rng, params);
  return out;
}

void write_path_csv(std::ostream& out, const PathSample& path) {
  out << "i,t,x,y,z\n";
  char buf[160];
  for (std::size_t i = 0; i < path.node_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, path.grid().time(i),
                  path.xs()[i], path.ys()[i], path.zs()[i]);
    out << buf;
  }
}

PathSample read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,t,x,y,z", 0) != 0) {
    throw ParameterError("path CSV: expected header i,t,x,y,z");
  }
  std::vector<Vec3> pos;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::array<double, 5> v{};
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (!std::getline(row, field, ',')) {
        throw ParameterError("path CSV: short row: " + line);
      }
      try {
        v[c] = std::stod(field);
      } catch (const std::exception&) {
        throw ParameterError("path CSV: bad number '" + field + "'");
      }
    }
    if (static_cast<std::size_t>(v[0]) != pos.size()) {
      throw ParameterError("path CSV: node indices must be 0, 1, 2, ...");
    }
    last_t = v[1];
    pos.push_back({v[2], v[3], v[4]});
  }
  if (pos.size() < 3) {
    throw ParameterError("path CSV: need at least 3 nodes");
  }
  const TimeGrid grid = make_grid(last_t, pos.size() - 1);
  return PathSample::from_positions(grid, pos);
}

}  // namespace polyel
