#pragma once

// Permutation-based smoothness prior.
//
//   r_sm(x) = sum_{shifts (i,j)} sum_k rho([M L P S_ij x]_k, eps_r)
//
// P reorders pixels along the patch tour, L is the 1D Laplacian with
// replicated ends, M = diag(m) weights each position by the inverse
// Laplacian norm of the corresponding patches, and S_ij extracts the
// (i,j)-shifted subimage of the mirror-padded image. M and P are frozen
// (computed once from the ordering-source image).

#include <optional>
#include <span>
#include <vector>

#include "patchreg/image.hpp"
#include "patchreg/ordering.hpp"
#include "patchreg/simd.hpp"

namespace patchreg {

struct RegularizerConfig {
  double gamma_edge = 1.5;
  /// Gradient-sum threshold for edge patches. nullopt disables edge
  /// detection (gamma == 1 everywhere).
  std::optional<double> g_thr = 3.5;
  double m_max = 20.0;
  double epsilon_r = 0.1;

  void validate() const;
};

/// Per-position weights, indexed by position in the ordering.
struct OrderingWeights {
  std::vector<double> m;
  std::vector<double> beta;
  std::vector<double> gamma;

  std::size_t size() const { return m.size(); }
  static OrderingWeights unit(std::size_t n);
};

inline double rho(double w, double eps) {
  const double a = w < 0 ? -w : w;
  return w * w / (a + eps);
}

inline double rho_prime(double w, double eps) {
  const double a = w < 0 ? -w : w;
  const double d = a + eps;
  return w * (a + 2.0 * eps) / (d * d);
}

/// out[k] = 2 v[k] - v[k-1] - v[k+1], v[-1] := v[0], v[n] := v[n-1].
std::vector<double> laplacian_1d(std::span<const double> v);

/// Central-difference gradient magnitude; borders use mirrored neighbors.
GrayImage gradient_magnitude(const GrayImage& img);

/// gamma per pixel (raster index): gamma_edge where the sum of gradient
/// magnitudes over the patch centered there exceeds g_thr, 1 elsewhere.
std::vector<double> edge_gamma(const GrayImage& img, std::size_t patch_side,
                               const RegularizerConfig& cfg);

/// beta_k = 0.5 * ||2 z_k - z_{k-1} - z_{k+1}||_2 over the ordered patches
/// (ends replicated), m_k = min(gamma_k / beta_k, m_max), and m_k = m_max
/// when beta_k == 0. `gamma_raster` is indexed by pixel, not position.
OrderingWeights compute_weights(const PatchSet& patches, const Permutation& perm,
                                std::span<const double> gamma_raster,
                                const RegularizerConfig& cfg);

struct RegularizerOptions {
  /// Sum over all patch_side^2 subimage shifts; otherwise only the
  /// central (unshifted) image is used.
  bool accumulate_shifts = true;
  simd::Penalty penalty = simd::Penalty::SmoothedL1;
};

class PermutationRegularizer {
 public:
  PermutationRegularizer(Dims dims, Permutation perm, std::vector<double> weights,
                         std::size_t patch_side, double epsilon,
                         RegularizerOptions options = {});

  Dims dims() const { return dims_; }
  std::size_t shift_count() const { return shifts_; }
  const Permutation& permutation() const { return perm_; }
  std::span<const double> weights() const { return m_; }

  double value(std::span<const double> x) const;

  /// Returns r(x) and adds scale * grad r(x) into `grad`.
  double accumulate(std::span<const double> x, double scale, std::span<double> grad) const;

  /// Returns r(x); `grad` is overwritten with grad r(x).
  double value_grad(std::span<const double> x, std::span<double> grad) const;

 private:
  double run(std::span<const double> x, double scale, double* grad) const;

  Dims dims_;
  Permutation perm_;
  std::vector<double> m_;
  std::size_t radius_;
  std::size_t shifts_;  // per axis
  double eps_;
  RegularizerOptions opts_;
  std::vector<std::int32_t> base_;  // padded index of order[k] at shift (1,1)
};

/// Exact minimizer of 0.5 ||x - y||^2 + (mu / 2) ||L P x||^2, i.e.
/// P^-1 (I + mu L^T L)^-1 P y, via a banded Cholesky solve.
GrayImage l2_closed_form_oracle(const GrayImage& y, const Permutation& perm, double mu);

}  // namespace patchreg
