#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "patchreg/image.hpp"
#include "patchreg/ordering.hpp"

namespace patchreg {

/// 10 log10(peak^2 / MSE); +inf when the images are identical.
double psnr(const GrayImage& x, const GrayImage& ref, double peak_value = 1.0);

/// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, population covariances, reflected borders and the
/// 5-pixel border excluded from the mean.
double ssim(const GrayImage& x, const GrayImage& ref, double data_range = 1.0);

/// Pr(|l| > k) for l = M L P x.
struct TailDistribution {
  std::vector<double> thresholds;
  std::vector<double> probabilities;
  /// Counts of |l| in the 256 uniform bins of [0, max |l|] (only for the
  /// automatic-threshold variant; sums to N).
  std::vector<std::size_t> histogram;
};

/// l = m .* L(P x) on the unshifted image.
std::vector<double> ordered_laplacian(std::span<const double> x, const Permutation& perm,
                                      std::span<const double> weights);

TailDistribution tail_distribution(std::span<const double> x, const Permutation& perm,
                                   std::span<const double> weights);
TailDistribution tail_distribution(std::span<const double> x, const Permutation& perm,
                                   std::span<const double> weights,
                                   std::span<const double> thresholds);

void write_tail_csv(std::ostream& os, const TailDistribution& t);

struct OrderingGroup {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

/// 50 position groups with 50% overlap over n positions.
std::vector<OrderingGroup> ordering_groups(std::size_t n, std::size_t groups = 50);

struct OrderingDiagnostics {
  /// |x[P(k+1)] - x[P(k)]|, length N - 1.
  std::vector<double> gradient;
  /// Per-group MSE of restored vs clean; empty without a restored image.
  std::vector<double> group_mse;
  /// 1 where the pixel sits in the last 15% of the central ordering.
  GrayImage tail_mask;
  /// Pixels that fall in the last 15% of every shifted ordering.
  GrayImage all_shift_mask;
  std::size_t all_shift_count = 0;
  double all_shift_fraction = 0.0;
};

/// `patch_side` sets the shifts used for the all-orderings statistic;
/// shifted orderings map back to source pixels through mirror reflection.
OrderingDiagnostics ordering_diagnostics(const GrayImage& clean, const Permutation& perm,
                                         std::size_t patch_side,
                                         const std::optional<GrayImage>& restored = std::nullopt,
                                         double tail_fraction = 0.15);

}  // namespace patchreg
