#pragma once

#include <cstddef>
#include <vector>

namespace polyel {

/// Worker count used by the library's parallel loops (default 1).
/// Numeric results never depend on it.
int worker_count();
void set_worker_count(int workers);

/// Row-block edge of the deterministic pair reductions.
inline constexpr std::size_t kReductionBlock = 256;

/// Evaluates `row(i)` for i in [0, rows), accumulates each block of
/// kReductionBlock consecutive rows in row order, then folds the block
/// partials in block order. Blocks are distributed over worker_count()
/// workers; the result is bitwise independent of that count.
template <class Accum, class RowFn>
Accum blocked_row_reduce(std::size_t rows, RowFn&& row) {
  const std::size_t blocks = (rows + kReductionBlock - 1) / kReductionBlock;
  std::vector<Accum> partial(blocks);
  const int workers = worker_count();
  const long long nblocks = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers) if (workers > 1 && blocks > 1)
  for (long long b = 0; b < nblocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t end = begin + kReductionBlock < rows ? begin + kReductionBlock : rows;
    Accum acc{};
    for (std::size_t i = begin; i < end; ++i) {
      acc += row(i);
    }
    partial[static_cast<std::size_t>(b)] = acc;
  }
  Accum total{};
  for (const Accum& p : partial) {
    total += p;
  }
  return total;
}

/// Runs `body(i)` for i in [0, count) over worker_count() workers. Each index
/// must write only its own output slot.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const int workers = worker_count();
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers) if (workers > 1 && count > 1)
  for (long long i = 0; i < n; ++i) {
    body(static_cast<std::size_t>(i));
  }
}

}  // namespace polyel
