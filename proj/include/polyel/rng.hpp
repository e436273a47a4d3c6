#pragma once

#include <cstdint>
#include <random>

#include "polyel/model.hpp"

namespace polyel {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Key of the stream (master_seed, stream_index); a pure function of both.
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t stream_index);

/// One random stream. Gaussians use Box-Muller so that the sequence depends
/// only on the engine, not on the standard library's distribution code.
class Rng {
public:
  explicit Rng(const SeedSpec& seed);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [lo, hi], both inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  double normal();

private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace polyel
