// AVX2 + FMA kernel variants. Compiled with -mavx2 -mfma; only reached after
// the runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace patchreg::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
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

inline double scalar_term(const double* v, const double* m, std::size_t n, std::size_t k,
                          double eps, Penalty penalty, double* w) {
  const double l = m[k] * lap_at(v, n, k);
  if (penalty == Penalty::SmoothedL1) {
    w[k] = m[k] * rho_prime(l, eps);
    return rho(l, eps);
  }
  w[k] = m[k] * l;
  return 0.5 * l * l;
}

double weighted_laplacian_penalty(const double* v, const double* m, std::size_t n, double eps,
                                  Penalty penalty, double* w) {
  if (n < 6) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += scalar_term(v, m, n, k, eps, penalty, w);
    return total;
  }
  double total = scalar_term(v, m, n, 0, eps, penalty, w);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d two_eps = _mm256_set1_pd(2.0 * eps);
  const __m256d half = _mm256_set1_pd(0.5);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 1;
  if (penalty == Penalty::SmoothedL1) {
    for (; k + 4 <= n - 1; k += 4) {
      const __m256d vc = _mm256_loadu_pd(v + k);
      const __m256d vp = _mm256_loadu_pd(v + k - 1);
      const __m256d vn = _mm256_loadu_pd(v + k + 1);
      const __m256d mk = _mm256_loadu_pd(m + k);
      const __m256d lap = _mm256_sub_pd(_mm256_fmsub_pd(two, vc, vp), vn);
      const __m256d l = _mm256_mul_pd(mk, lap);
      const __m256d a = vabs(l);
      const __m256d d = _mm256_add_pd(a, veps);
      acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_mul_pd(l, l), d));
      const __m256d dp = _mm256_div_pd(_mm256_mul_pd(l, _mm256_add_pd(a, two_eps)),
                                       _mm256_mul_pd(d, d));
      _mm256_storeu_pd(w + k, _mm256_mul_pd(mk, dp));
    }
  } else {
    for (; k + 4 <= n - 1; k += 4) {
      const __m256d vc = _mm256_loadu_pd(v + k);
      const __m256d vp = _mm256_loadu_pd(v + k - 1);
      const __m256d vn = _mm256_loadu_pd(v + k + 1);
      const __m256d mk = _mm256_loadu_pd(m + k);
      const __m256d lap = _mm256_sub_pd(_mm256_fmsub_pd(two, vc, vp), vn);
      const __m256d l = _mm256_mul_pd(mk, lap);
      acc = _mm256_fmadd_pd(_mm256_mul_pd(half, l), l, acc);
      _mm256_storeu_pd(w + k, _mm256_mul_pd(mk, l));
    }
  }
  total += hsum(acc);
  for (; k < n; ++k) total += scalar_term(v, m, n, k, eps, penalty, w);
  return total;
}

void laplacian(const double* w, std::size_t n, double* out) {
  if (n < 6) {
    for (std::size_t k = 0; k < n; ++k) out[k] = lap_at(w, n, k);
    return;
  }
  out[0] = lap_at(w, n, 0);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t k = 1;
  for (; k + 4 <= n - 1; k += 4) {
    const __m256d vc = _mm256_loadu_pd(w + k);
    const __m256d vp = _mm256_loadu_pd(w + k - 1);
    const __m256d vn = _mm256_loadu_pd(w + k + 1);
    _mm256_storeu_pd(out + k, _mm256_sub_pd(_mm256_fmsub_pd(two, vc, vp), vn));
  }
  for (; k < n; ++k) out[k] = lap_at(w, n, k);
}

void gather(const double* src, const std::int32_t* idx, std::ptrdiff_t offset, std::size_t n,
            double* dst) {
  const double* base = src + offset;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
    _mm256_storeu_pd(dst + k, _mm256_i32gather_pd(base, vi, 8));
  }
  for (; k < n; ++k) dst[k] = base[idx[k]];
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{Backend::Avx2, squared_distance, weighted_laplacian_penalty,
                         laplacian,     gather,           dot,
                         axpy};
  return k;
}

}  // namespace patchreg::simd::detail
