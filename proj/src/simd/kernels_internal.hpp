#pragma once

#include <cmath>

#include "patchreg/simd.hpp"

namespace patchreg::simd::detail {

const Kernels& scalar_kernels();
#if defined(PATCHREG_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif

inline double rho(double l, double eps) {
  const double a = std::fabs(l);
  return l * l / (a + eps);
}

inline double rho_prime(double l, double eps) {
  const double a = std::fabs(l);
  const double d = a + eps;
  return l * (a + 2.0 * eps) / (d * d);
}

}  // namespace patchreg::simd::detail
