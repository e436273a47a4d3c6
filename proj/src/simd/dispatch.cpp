#include <atomic>
#include <cstring>

#include "polyel/simd/pair_kernels.hpp"

namespace polyel::simd {

#if defined(POLYEL_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(POLYEL_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* by_name(const char* name) {
  if (name == nullptr || std::strcmp(name, "auto") == 0) {
    const KernelTable* v = avx2_kernels();
    return v != nullptr ? v : &scalar_kernels();
  }
  if (std::strcmp(name, "scalar") == 0) {
    return &scalar_kernels();
  }
  if (std::strcmp(name, "avx2") == 0) {
    return avx2_kernels();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{by_name("auto")};
  return table;
}

}  // namespace

const KernelTable& active_kernels() { return *current().load(std::memory_order_acquire); }

bool select_kernels(const char* name) {
  const KernelTable* t = by_name(name);
  if (t == nullptr) {
    return false;
  }
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace polyel::simd
