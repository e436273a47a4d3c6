#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "polyel/model.hpp"
#include "polyel/rng.hpp"

namespace polyel {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm2() const { return x * x + y * y + z * z; }
};

/// Row-major 3x3 matrix used for pivot rotations.
struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Rotation identity() { return {}; }

  /// Rotation of the unit quaternion (w, x, y, z); the input is normalized.
  static Rotation from_quaternion(double w, double x, double y, double z);

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Rotation transpose() const;
  double determinant() const;

  /// True when R^T R = I and det R = +1, both to `tol` (max abs entry).
  bool is_proper(double tol = 1e-12) const;
};

/// Haar-uniform rotation (uniform unit quaternion from four Gaussians).
Rotation random_rotation(Rng& rng);

/// A discretized 3D path pinned at the origin.
///
/// Increments are the canonical state; positions are their prefix sums and
/// are stored as separate x/y/z arrays for the pair kernels.
/// `increment(i)` for i = 1..n is position(i) - position(i-1).
class PathSample {
public:
  PathSample() = default;

  /// Throws ParameterError if the count is not grid.n_steps() or a value is not finite.
  static PathSample from_increments(const TimeGrid& grid, std::vector<Vec3> increments);

  /// positions.size() must be grid.node_count() and positions[0] the origin.
  static PathSample from_positions(const TimeGrid& grid, std::span<const Vec3> positions);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_steps() const { return grid_.n_steps(); }
  std::size_t node_count() const { return grid_.node_count(); }

  std::span<const Vec3> increments() const { return increments_; }
  Vec3 increment(std::size_t i) const { return increments_[i - 1]; }
  Vec3 position(std::size_t i) const { return {x_[i], y_[i], z_[i]}; }

  std::span<const double> xs() const { return x_; }
  std::span<const double> ys() const { return y_; }
  std::span<const double> zs() const { return z_; }

  double endpoint_x1() const { return x_.back(); }

  /// In-place forms of the path moves; see the free functions below.
  void rotate_tail(std::size_t k, const Rotation& rotation);
  void set_increment(std::size_t i, const Vec3& value) { increments_[i - 1] = value; }
  void rebuild_positions(std::size_t from_node = 0);

  friend bool operator==(const PathSample&, const PathSample&) = default;

private:
  TimeGrid grid_;
  std::vector<Vec3> increments_;
  std::vector<double> x_, y_, z_;
};

/// Independent increments N(mu dt e1, dt I3).
PathSample sample_path(const ModelParams& params, const SeedSpec& seed);
PathSample sample_path(const ModelParams& params, Rng& rng);

/// Rotates increments k+1..n; positions 0..k are untouched.
/// Requires 1 <= k <= n and a proper rotation.
PathSample apply_pivot(const PathSample& path, std::size_t k, const Rotation& rotation);

/// Prior-preserving autoregressive refresh of all increments:
/// xi' = sqrt(1 - s^2) (xi - m) + s zeta + m, with m = mu dt e1 and zeta ~ N(0, dt I3).
PathSample apply_global_autoregressive(const PathSample& path, double s, const SeedSpec& noise_seed,
                                       const ModelParams& params);
void global_autoregressive_in_place(PathSample& path, double s, Rng& rng, const ModelParams& params);

/// Redraws increments i0..i0+len-1 (1-based) from the base increment law.
PathSample resample_block(const PathSample& path, std::size_t i0, std::size_t len,
                          const SeedSpec& seed, const ModelParams& params);
void resample_block_in_place(PathSample& path, std::size_t i0, std::size_t len, Rng& rng,
                             const ModelParams& params);

/// CSV with header `i,t,x,y,z`, one row per node, 17 significant digits.
void write_path_csv(std::ostream& out, const PathSample& path);

/// Reads the format written by write_path_csv. The grid is rebuilt from the
/// last time value and the row count.
PathSample read_path_csv(std::istream& in);

}  // namespace polyel
