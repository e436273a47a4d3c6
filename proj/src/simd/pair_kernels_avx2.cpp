// Compiled with -mavx2 -ffp-contract=off; only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>
#include <cmath>

#include "polyel/simd/pair_kernels.hpp"

namespace polyel::simd {

namespace {

inline double fold(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

PairAccum row_pair_avx2(double px, double py, double pz, PointsSoA pts, double min_dist) {
  const __m256d vpx = _mm256_set1_pd(px);
  const __m256d vpy = _mm256_set1_pd(py);
  const __m256d vpz = _mm256_set1_pd(pz);
  const __m256d vmin = _mm256_set1_pd(min_dist);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d inv = _mm256_setzero_pd();
  __m256d sq = _mm256_setzero_pd();
  std::uint64_t clamped = 0;

  std::size_t j = 0;
  for (; j + 4 <= pts.size; j += 4) {
    const __m256d dx = _mm256_sub_pd(vpx, _mm256_loadu_pd(pts.x + j));
    const __m256d dy = _mm256_sub_pd(vpy, _mm256_loadu_pd(pts.y + j));
    const __m256d dz = _mm256_sub_pd(vpz, _mm256_loadu_pd(pts.z + j));
    const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                     _mm256_mul_pd(dz, dz));
    __m256d d = _mm256_sqrt_pd(d2);
    const __m256d below = _mm256_cmp_pd(d, vmin, _CMP_LT_OQ);
    d = _mm256_blendv_pd(d, vmin, below);
    clamped += static_cast<std::uint64_t>(std::popcount(
        static_cast<unsigned>(_mm256_movemask_pd(below))));
    inv = _mm256_add_pd(inv, _mm256_div_pd(one, d));
    sq = _mm256_add_pd(sq, d2);
  }

  PairAccum acc{fold(inv), fold(sq), clamped};
  for (; j < pts.size; ++j) {
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

double row_sq_avx2(double px, double py, double pz, PointsSoA pts) {
  const __m256d vpx = _mm256_set1_pd(px);
  const __m256d vpy = _mm256_set1_pd(py);
  const __m256d vpz = _mm256_set1_pd(pz);
  __m256d sq = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= pts.size; j += 4) {
    const __m256d dx = _mm256_sub_pd(vpx, _mm256_loadu_pd(pts.x + j));
    const __m256d dy = _mm256_sub_pd(vpy, _mm256_loadu_pd(pts.y + j));
    const __m256d dz = _mm256_sub_pd(vpz, _mm256_loadu_pd(pts.z + j));
    sq = _mm256_add_pd(sq, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                         _mm256_mul_pd(dz, dz)));
  }
  double sum = fold(sq);
  for (; j < pts.size; ++j) {
    const double dx = px - pts.x[j];
    const double dy = py - pts.y[j];
    const double dz = pz - pts.z[j];
    sum += (dx * dx + dy * dy) + dz * dz;
  }
  return sum;
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", &row_pair_avx2, &row_sq_avx2};
  return table;
}

}  // namespace polyel::simd
