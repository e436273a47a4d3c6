#include "polyel/parallel.hpp"

#include <atomic>

namespace polyel {

namespace {
std::atomic<int> g_workers{1};
}

int worker_count() { return g_workers.load(std::memory_order_relaxed); }

void set_worker_count(int workers) { g_workers.store(workers < 1 ? 1 : workers, std::memory_order_relaxed); }

}  // namespace polyel
