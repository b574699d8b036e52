#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace patchreg::simd {
namespace {

bool cpu_has_avx2() {
#if defined(PATCHREG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("PATCHREG_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const Kernels*>& active() {
  static std::atomic<const Kernels*> ptr{&kernels(detect())};
  return ptr;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

const Kernels& kernels(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return detail::scalar_kernels();
    case Backend::Avx2:
#if defined(PATCHREG_HAVE_AVX2)
      if (backend_available(Backend::Avx2)) return detail::avx2_kernels();
#endif
      break;
  }
  throw std::runtime_error("simd backend not available: " + std::string(backend_name(b)));
}

const Kernels& kernels() { return *active().load(std::memory_order_acquire); }

Backend active_backend() { return kernels().backend; }

void set_backend(Backend b) { active().store(&kernels(b), std::memory_order_release); }

}  // namespace patchreg::simd
