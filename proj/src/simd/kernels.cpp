#include "detangle/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace detangle::simd {

#if defined(DETANGLE_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(DETANGLE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const char* env = std::getenv("DETANGLE_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(DETANGLE_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

bool backend_available(Backend backend) {
  return backend == Backend::kScalar || avx2_kernels() != nullptr;
}

Backend active_backend() { return current().load()->backend; }

bool set_backend(Backend backend) {
  if (backend == Backend::kScalar) {
    current().store(&scalar_kernels());
    return true;
  }
  const KernelTable* t = avx2_kernels();
  if (t == nullptr) return false;
  current().store(t);
  return true;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

}  // namespace detangle::simd
