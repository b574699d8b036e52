#include "patchreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "patchreg/regularizer.hpp"

namespace patchreg {

double psnr(const GrayImage& x, const GrayImage& ref, double peak_value) {
  require_same_dims(x, ref, "psnr");
  if (x.empty()) throw InvalidArgument("psnr: empty image");
  double se = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - ref[k];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(x.size());
  return 10.0 * std::log10(peak_value * peak_value / mse);
}

namespace {

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;

// Separable normalized Gaussian, symmetric reflection at the borders.
GrayImage gaussian_blur(const GrayImage& img) {
  double w[2 * kSsimRadius + 1];
  double s = 0.0;
  for (int t = -kSsimRadius; t <= kSsimRadius; ++t) {
    w[t + kSsimRadius] = std::exp(-0.5 * t * t / (kSsimSigma * kSsimSigma));
    s += w[t + kSsimRadius];
  }
  for (double& v : w) v /= s;

  const auto wd = static_cast<std::ptrdiff_t>(img.width());
  const auto ht = static_cast<std::ptrdiff_t>(img.height());
  // Reflection below handles a single bounce only.
  if (wd < kSsimRadius || ht < kSsimRadius) throw InvalidArgument("ssim: image too small");
  GrayImage tmp(img.dims()), out(img.dims());
  for (std::ptrdiff_t r = 0; r < ht; ++r)
    for (std::ptrdiff_t c = 0; c < wd; ++c) {
      double a = 0.0;
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        a += w[t + kSsimRadius] * img.at(r, reflect_index(c + t, wd));
      tmp.at(r, c) = a;
    }
  for (std::ptrdiff_t r = 0; r < ht; ++r)
    for (std::ptrdiff_t c = 0; c < wd; ++c) {
      double a = 0.0;
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        a += w[t + kSsimRadius] * tmp.at(reflect_index(r + t, ht), c);
      out.at(r, c) = a;
    }
  return out;
}

}  // namespace

double ssim(const GrayImage& x, const GrayImage& ref, double data_range) {
  require_same_dims(x, ref, "ssim");
  if (x.width() <= 2 * kSsimRadius || x.height() <= 2 * kSsimRadius)
    throw InvalidArgument("ssim: image smaller than the window");
  const std::size_t n = x.size();
  GrayImage xx(x.dims()), yy(x.dims()), xy(x.dims());
  for (std::size_t k = 0; k < n; ++k) {
    xx[k] = x[k] * x[k];
    yy[k] = ref[k] * ref[k];
    xy[k] = x[k] * ref[k];
  }
  const GrayImage ux = gaussian_blur(x), uy = gaussian_blur(ref);
  const GrayImage uxx = gaussian_blur(xx), uyy = gaussian_blur(yy), uxy = gaussian_blur(xy);
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = kSsimRadius; r + kSsimRadius < x.height(); ++r)
    for (std::size_t c = kSsimRadius; c + kSsimRadius < x.width(); ++c) {
      const double mx = ux.at(r, c), my = uy.at(r, c);
      const double vx = uxx.at(r, c) - mx * mx;
      const double vy = uyy.at(r, c) - my * my;
      const double vxy = uxy.at(r, c) - mx * my;
      total += ((2 * mx * my + c1) * (2 * vxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

std::vector<double> ordered_laplacian(std::span<const double> x, const Permutation& perm,
                                      std::span<const double> weights) {
  if (x.size() != perm.size() || weights.size() != perm.size())
    throw InvalidArgument("ordered_laplacian: size mismatch");
  std::vector<double> l = laplacian_1d(apply_permutation(perm, x));
  for (std::size_t k = 0; k < l.size(); ++k) l[k] *= weights[k];
  return l;
}

TailDistribution tail_distribution(std::span<const double> x, const Permutation& perm,
                                   std::span<const double> weights,
                                   std::span<const double> thresholds) {
  std::vector<double> a = ordered_laplacian(x, perm, weights);
  for (double& v : a) v = std::fabs(v);
  std::sort(a.begin(), a.end());
  TailDistribution t;
  t.thresholds.assign(thresholds.begin(), thresholds.end());
  const auto n = static_cast<double>(a.size());
  for (double k : thresholds) {
    const auto above = a.end() - std::upper_bound(a.begin(), a.end(), k);
    t.probabilities.push_back(n > 0 ? static_cast<double>(above) / n : 0.0);
  }
  return t;
}

TailDistribution tail_distribution(std::span<const double> x, const Permutation& perm,
                                   std::span<const double> weights) {
  constexpr std::size_t bins = 256;
  const std::vector<double> l = ordered_laplacian(x, perm, weights);
  double mx = 0.0;
  for (double v : l) mx = std::max(mx, std::fabs(v));
  std::vector<double> thr(bins);
  for (std::size_t b = 0; b < bins; ++b) thr[b] = mx * static_cast<double>(b) / bins;
  TailDistribution t = tail_distribution(x, perm, weights, thr);
  t.histogram.assign(bins, 0);
  for (double v : l) {
    std::size_t b = mx > 0.0 ? static_cast<std::size_t>(std::fabs(v) / mx * bins) : 0;
    t.histogram[std::min(b, bins - 1)]++;
  }
  return t;
}

void write_tail_csv(std::ostream& os, const TailDistribution& t) {
  os << "threshold,probability\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.thresholds.size(); ++i)
    os << t.thresholds[i] << ',' << t.probabilities[i] << '\n';
}

std::vector<OrderingGroup> ordering_groups(std::size_t n, std::size_t groups) {
  if (groups == 0) throw InvalidArgument("ordering_groups: need at least one group");
  // groups windows of length L stepping by L/2 cover (groups + 1) L / 2 = n.
  std::vector<OrderingGroup> out(groups);
  const double len = 2.0 * static_cast<double>(n) / static_cast<double>(groups + 1);
  for (std::size_t g = 0; g < groups; ++g) {
    const double b = 0.5 * len * static_cast<double>(g);
    out[g].begin = static_cast<std::size_t>(std::llround(b));
    out[g].end = std::min(n, static_cast<std::size_t>(std::llround(b + len)));
  }
  out.back().end = n;
  return out;
}

OrderingDiagnostics ordering_diagnostics(const GrayImage& clean, const Permutation& perm,
                                         std::size_t patch_side,
                                         const std::optional<GrayImage>& restored,
                                         double tail_fraction) {
  const std::size_t n = clean.size();
  if (perm.size() != n) throw InvalidArgument("ordering_diagnostics: size mismatch");
  if (patch_side == 0 || patch_side % 2 == 0)
    throw InvalidArgument("ordering_diagnostics: patch side must be odd");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw InvalidArgument("ordering_diagnostics: tail fraction must lie in (0, 1]");
  if (restored) require_same_dims(clean, *restored, "ordering_diagnostics");

  OrderingDiagnostics d;
  if (n > 1) {
    d.gradient.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
      d.gradient[k] = std::fabs(clean[perm[k + 1]] - clean[perm[k]]);
  }
  if (restored) {
    for (const auto& g : ordering_groups(n)) {
      double se = 0.0;
      for (std::size_t k = g.begin; k < g.end; ++k) {
        const double e = (*restored)[perm[k]] - clean[perm[k]];
        se += e * e;
      }
      d.group_mse.push_back(g.end > g.begin ? se / static_cast<double>(g.end - g.begin) : 0.0);
    }
  }

  const auto tail_start = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - tail_fraction)));
  d.tail_mask = GrayImage(clean.dims());
  for (std::size_t k = tail_start; k < n; ++k) d.tail_mask[perm[k]] = 1.0;

  const auto w = static_cast<std::ptrdiff_t>(clean.width());
  const auto h = static_cast<std::ptrdiff_t>(clean.height());
  const auto rad = static_cast<std::ptrdiff_t>(patch_side / 2);
  if (rad > std::min(w, h)) throw InvalidArgument("ordering_diagnostics: patch larger than image");
  std::vector<std::size_t> hits(n, 0);
  std::vector<std::size_t> stamp(n, 0);
  std::size_t shift_id = 0;
  for (std::ptrdiff_t i = -rad; i <= rad; ++i)
    for (std::ptrdiff_t j = -rad; j <= rad; ++j) {
      ++shift_id;
      for (std::size_t k = tail_start; k < n; ++k) {
        const std::ptrdiff_t r = reflect_index(perm[k] / w + i, h);
        const std::ptrdiff_t c = reflect_index(perm[k] % w + j, w);
        const auto src = static_cast<std::size_t>(r * w + c);
        if (stamp[src] != shift_id) {
          stamp[src] = shift_id;
          ++hits[src];
        }
      }
    }
  d.all_shift_mask = GrayImage(clean.dims());
  for (std::size_t p = 0; p < n; ++p)
    if (hits[p] == shift_id) {
      d.all_shift_mask[p] = 1.0;
      ++d.all_shift_count;
    }
  d.all_shift_fraction = static_cast<double>(d.all_shift_count) / static_cast<double>(n);
  return d;
}

}  // namespace patchreg
