#include "polyel/simd/pair_kernels.hpp"

#include <cmath>

namespace polyel::simd {

namespace {

PairAccum row_pair_scalar(double px, double py, double pz, PointsSoA pts, double min_dist) {
  PairAccum acc;
  for (std::size_t j = 0; j < pts.size; ++j) {
    const double dx = px - pts.x[j];
    const double dy = py - pts.y[j];
    const double dz = pz - pts.z[j];
    const double d2 = (dx * dx + dy * dy) + dz * dz;
    double d = std::sqrt(d2);
    if (d < min_dist) {
      d = min_dist;
      ++acc.clamped;
    }
    acc.inv_sum += 1.0 / d;
    acc.sq_sum += d2;
  }
  return acc;
}

double row_sq_scalar(double px, double py, double pz, PointsSoA pts) {
  double sum = 0.0;
  for (std::size_t j = 0; j < pts.size; ++j) {
    const double dx = px - pts.x[j];
    const double dy = py - pts.y[j];
    const double dz = pz - pts.z[j];
    sum += (dx * dx + dy * dy) + dz * dz;
  }
  return sum;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &row_pair_scalar, &row_sq_scalar};
  return table;
}

}  // namespace polyel::simd
