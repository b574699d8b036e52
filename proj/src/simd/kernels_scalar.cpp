// Scalar reference kernels. The AVX2 variants are tested against these.

#include "kernels_internal.hpp"

namespace patchreg::simd::detail {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double lap_at(const double* v, std::size_t n, std::size_t k) {
  const double prev = k == 0 ? v[0] : v[k - 1];
  const double next = k + 1 == n ? v[n - 1] : v[k + 1];
  return 2.0 * v[k] - prev - next;
}

double weighted_laplacian_penalty(const double* v, const double* m, std::size_t n, double eps,
                                  Penalty penalty, double* w) {
  double total = 0.0;
  if (penalty == Penalty::SmoothedL1) {
    for (std::size_t k = 0; k < n; ++k) {
      const double l = m[k] * lap_at(v, n, k);
      total += rho(l, eps);
      w[k] = m[k] * rho_prime(l, eps);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double l = m[k] * lap_at(v, n, k);
      total += 0.5 * l * l;
      w[k] = m[k] * l;
    }
  }
  return total;
}

void laplacian(const double* w, std::size_t n, double* out) {
  for (std::size_t k = 0; k < n; ++k) out[k] = lap_at(w, n, k);
}

void gather(const double* src, const std::int32_t* idx, std::ptrdiff_t offset, std::size_t n,
            double* dst) {
  for (std::size_t k = 0; k < n; ++k) dst[k] = src[idx[k] + offset];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Backend::Scalar, squared_distance, weighted_laplacian_penalty,
                         laplacian,       gather,           dot,
                         axpy};
  return k;
}

}  // namespace patchreg::simd::detail
