#pragma once

// Row kernels for the O(n^2) pair sums. Every kernel pairs one point p with
// a contiguous run of points q_j (structure-of-arrays) and returns
//   inv_sum = sum_j 1 / max(|p - q_j|, min_dist)
//   sq_sum  = sum_j |p - q_j|^2
//   clamped = #{ j : |p - q_j| < min_dist }
//
// The scalar table is the reference. Vector tables evaluate each pair term
// with the same operation sequence (no FMA), so per-pair terms are bitwise
// equal; only the summation order differs (lane-striped, lanes folded as
// (l0 + l1) + (l2 + l3), then the scalar tail).

#include <cstddef>
#include <cstdint>

namespace polyel::simd {

struct PairAccum {
  double inv_sum = 0.0;
  double sq_sum = 0.0;
  std::uint64_t clamped = 0;

  PairAccum& operator+=(const PairAccum& o) {
    inv_sum += o.inv_sum;
    sq_sum += o.sq_sum;
    clamped += o.clamped;
    return *this;
  }
};

struct PointsSoA {
  const double* x = nullptr;
  const double* y = nullptr;
  const double* z = nullptr;
  std::size_t size = 0;

  PointsSoA subrange(std::size_t begin, std::size_t end) const {
    return {x + begin, y + begin, z + begin, end - begin};
  }
};

using RowPairFn = PairAccum (*)(double px, double py, double pz, PointsSoA pts, double min_dist);
using RowSqFn = double (*)(double px, double py, double pz, PointsSoA pts);

struct KernelTable {
  const char* name;
  RowPairFn row_pair;
  RowSqFn row_sq;
};

const KernelTable& scalar_kernels();

/// nullptr when the variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Kernel set used by the library: the best supported variant unless
/// select_kernels() chose another.
const KernelTable& active_kernels();

/// Overrides the process-wide choice ("scalar", "avx2" or "auto").
/// Returns false if the requested variant is unavailable.
bool select_kernels(const char* name);

}  // namespace polyel::simd
