#pragma once

// Data-parallel inner loops used by ordering, regularizer and the optimizer.
//
// Every kernel has a scalar reference implementation; an AVX2+FMA variant is
// compiled into a separate translation unit and picked at runtime when the
// CPU supports it. PATCHREG_SIMD=scalar in the environment (or
// set_backend()) forces the reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace patchreg::simd {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);

/// Penalty applied to the weighted Laplacian coefficients.
enum class Penalty {
  SmoothedL1,  // rho(l, eps) = l^2 / (|l| + eps)
  Quadratic,   // l^2 / 2
};

struct Kernels {
  Backend backend;

  /// sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  /// For the contiguous sequence v[0..n):
  ///   l[k] = m[k] * (2 v[k] - v[k-1] - v[k+1])   (ends replicated)
  ///   w[k] = m[k] * penalty'(l[k])
  /// Returns sum_k penalty(l[k]). `eps` is ignored for Quadratic.
  double (*weighted_laplacian_penalty)(const double* v, const double* m, std::size_t n,
                                       double eps, Penalty penalty, double* w);

  /// out[k] = 2 w[k] - w[k-1] - w[k+1] with replicated ends (self-adjoint).
  void (*laplacian)(const double* w, std::size_t n, double* out);

  /// dst[k] = src[idx[k] + offset]
  void (*gather)(const double* src, const std::int32_t* idx, std::ptrdiff_t offset,
                 std::size_t n, double* dst);

  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

bool backend_available(Backend b);

/// Kernels for a specific backend. Throws if the backend is unavailable.
const Kernels& kernels(Backend b);

/// Kernels of the active backend.
const Kernels& kernels();

Backend active_backend();

/// Overrides runtime detection. Throws if the backend is unavailable.
void set_backend(Backend b);

/// Scope guard restoring the previous backend, for tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace patchreg::simd
