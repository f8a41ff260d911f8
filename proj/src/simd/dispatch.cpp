#include <atomic>
#include <cstdlib>
#include <string>

#include "qbm/simd/kernels.hpp"

namespace qbm::simd {

#if defined(QBM_HAVE_AVX2_KERNELS)
namespace detail {
const KernelTable& avx2_table();
}
#endif

namespace {

bool cpu_has_avx2() {
#if defined(QBM_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_choice() {
  const KernelTable* best = avx2_kernels();
  if (const char* env = std::getenv("QBM_SIMD")) {
    const std::string v = env;
    if (v == "scalar") return &scalar_kernels();
  }
  return best ? best : &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_choice()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(QBM_HAVE_AVX2_KERNELS)
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() { return *current().load(std::memory_order_acquire); }

Backend active_backend() { return kernels().backend; }

bool set_backend(Backend b) {
  const KernelTable* t = b == Backend::scalar ? &scalar_kernels() : avx2_kernels();
  if (!t) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace qbm::simd
