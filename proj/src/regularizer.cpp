#include "patchreg/regularizer.hpp"

#include <lapacke.h>

#include <cmath>
#include <stdexcept>

namespace patchreg {

void RegularizerConfig::validate() const {
  if (!(gamma_edge >= 1.0)) throw InvalidArgument("regularizer: gamma_edge must be >= 1");
  if (!(m_max > 0.0)) throw InvalidArgument("regularizer: m_max must be positive");
  if (!(epsilon_r > 0.0)) throw InvalidArgument("regularizer: epsilon_r must be positive");
}

OrderingWeights OrderingWeights::unit(std::size_t n) {
  return {std::vector<double>(n, 1.0), std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
}

std::vector<double> laplacian_1d(std::span<const double> v) {
  std::vector<double> out(v.size());
  if (!v.empty()) simd::kernels().laplacian(v.data(), v.size(), out.data());
  return out;
}

GrayImage gradient_magnitude(const GrayImage& img) {
  const GrayImage p = mirror_pad(img, 1);
  GrayImage g(img.dims());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      const double gx = 0.5 * (p.at(r + 1, c + 2) - p.at(r + 1, c));
      const double gy = 0.5 * (p.at(r + 2, c + 1) - p.at(r, c + 1));
      g.at(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

std::vector<double> edge_gamma(const GrayImage& img, std::size_t patch_side,
                               const RegularizerConfig& cfg) {
  cfg.validate();
  std::vector<double> gamma(img.size(), 1.0);
  if (!cfg.g_thr) return gamma;
  const std::size_t rad = patch_side / 2;
  const GrayImage gp = mirror_pad(gradient_magnitude(img), rad);
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      double sum = 0.0;
      for (std::size_t dr = 0; dr < patch_side; ++dr)
        for (std::size_t dc = 0; dc < patch_side; ++dc) sum += gp.at(r + dr, c + dc);
      if (sum > *cfg.g_thr) gamma[r * img.width() + c] = cfg.gamma_edge;
    }
  }
  return gamma;
}

OrderingWeights compute_weights(const PatchSet& patches, const Permutation& perm,
                                std::span<const double> gamma_raster,
                                const RegularizerConfig& cfg) {
  cfg.validate();
  const std::size_t n = perm.size();
  if (patches.count() != n || gamma_raster.size() != n)
    throw InvalidArgument("compute_weights: size mismatch");
  const std::size_t dim = patches.patch_size();
  OrderingWeights w{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const auto cur = patches.patch(perm[k]);
    const auto prev = patches.patch(perm[k == 0 ? 0 : k - 1]);
    const auto next = patches.patch(perm[k + 1 == n ? n - 1 : k + 1]);
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
      const double d = 2.0 * cur[t] - prev[t] - next[t];
      s += d * d;
    }
    const double beta = 0.5 * std::sqrt(s);
    const double gamma = gamma_raster[perm[k]];
    w.beta[k] = beta;
    w.gamma[k] = gamma;
    w.m[k] = beta > 0.0 ? std::min(gamma / beta, cfg.m_max) : cfg.m_max;
  }
  return w;
}

PermutationRegularizer::PermutationRegularizer(Dims dims, Permutation perm,
                                               std::vector<double> weights,
                                               std::size_t patch_side, double epsilon,
                                               RegularizerOptions options)
    : dims_(dims),
      perm_(std::move(perm)),
      m_(std::move(weights)),
      radius_(options.accumulate_shifts ? patch_side / 2 : 0),
      shifts_(options.accumulate_shifts ? patch_side : 1),
      eps_(epsilon),
      opts_(options) {
  if (perm_.size() != dims_.size() || m_.size() != dims_.size())
    throw InvalidArgument("PermutationRegularizer: size mismatch");
  if (patch_side == 0 || patch_side % 2 == 0)
    throw InvalidArgument("PermutationRegularizer: patch side must be odd");
  if (opts_.penalty == simd::Penalty::SmoothedL1 && !(eps_ > 0.0))
    throw InvalidArgument("PermutationRegularizer: epsilon must be positive");
  if (radius_ > std::min(dims_.width, dims_.height))
    throw InvalidArgument("PermutationRegularizer: image smaller than patch radius");
  const std::size_t wp = dims_.width + 2 * radius_;
  base_.resize(perm_.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) {
    const std::size_t r = static_cast<std::size_t>(perm_[k]) / dims_.width;
    const std::size_t c = static_cast<std::size_t>(perm_[k]) % dims_.width;
    base_[k] = static_cast<std::int32_t>(r * wp + c);
  }
}

double PermutationRegularizer::run(std::span<const double> x, double scale, double* grad) const {
  if (x.size() != dims_.size()) throw InvalidArgument("regularizer: dimension mismatch");
  const auto& kern = simd::kernels();
  const std::size_t n = x.size();
  const GrayImage src(dims_.width, dims_.height, std::vector<double>(x.begin(), x.end()));
  const GrayImage padded = radius_ > 0 ? mirror_pad(src, radius_) : src;
  const std::size_t wp = padded.width();

  std::vector<double> v(n), w(n), u(n);
  GrayImage gpad;
  if (grad) gpad = GrayImage(padded.dims());

  double total = 0.0;
  for (std::size_t i = 0; i < shifts_; ++i) {
    for (std::size_t j = 0; j < shifts_; ++j) {
      const auto offset = static_cast<std::ptrdiff_t>(i * wp + j);
      kern.gather(padded.storage().data(), base_.data(), offset, n, v.data());
      total += kern.weighted_laplacian_penalty(v.data(), m_.data(), n, eps_, opts_.penalty,
                                               w.data());
      if (!grad) continue;
      kern.laplacian(w.data(), n, u.data());
      double* g = gpad.storage().data() + offset;
      for (std::size_t k = 0; k < n; ++k) g[base_[k]] += u[k];
    }
  }
  if (grad) {
    const GrayImage folded = radius_ > 0 ? mirror_pad_adjoint(gpad, radius_, dims_) : gpad;
    kern.axpy(scale, folded.storage().data(), grad, n);
  }
  return total;
}

double PermutationRegularizer::value(std::span<const double> x) const {
  return run(x, 0.0, nullptr);
}

double PermutationRegularizer::accumulate(std::span<const double> x, double scale,
                                          std::span<double> grad) const {
  if (grad.size() != dims_.size()) throw InvalidArgument("regularizer: gradient size mismatch");
  return run(x, scale, grad.data());
}

double PermutationRegularizer::value_grad(std::span<const double> x,
                                          std::span<double> grad) const {
  if (grad.size() != dims_.size()) throw InvalidArgument("regularizer: gradient size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  return run(x, 1.0, grad.data());
}

GrayImage l2_closed_form_oracle(const GrayImage& y, const Permutation& perm, double mu) {
  const std::size_t n = y.size();
  if (perm.size() != n) throw InvalidArgument("l2_closed_form_oracle: size mismatch");
  if (mu < 0.0) throw InvalidArgument("l2_closed_form_oracle: mu must be non-negative");
  if (n == 0) return y;

  // Rows of L with replicated ends: row k has coefficients on k-1, k, k+1
  // after folding the replicated neighbor onto the end column.
  constexpr int kd = 2;
  const int ldab = kd + 1;
  // Upper band storage, column-major: ab[(kd + i - j) + j * ldab] = A(i, j), i <= j.
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  auto add = [&](std::size_t i, std::size_t j, double val) {
    if (i > j) std::swap(i, j);
    ab[(kd + i - j) + j * ldab] += val;
  };
  for (std::size_t k = 0; k < n; ++k) {
    double coef[3] = {-1.0, 2.0, -1.0};
    std::size_t col[3] = {k == 0 ? 0 : k - 1, k, k + 1 == n ? n - 1 : k + 1};
    // Merge duplicate columns.
    std::vector<std::pair<std::size_t, double>> row;
    for (int t = 0; t < 3; ++t) {
      bool merged = false;
      for (auto& e : row)
        if (e.first == col[t]) {
          e.second += coef[t];
          merged = true;
        }
      if (!merged) row.emplace_back(col[t], coef[t]);
    }
    for (const auto& a : row)
      for (const auto& b : row)
        if (a.first <= b.first) add(a.first, b.first, mu * a.second * b.second);
  }
  for (std::size_t k = 0; k < n; ++k) ab[kd + k * ldab] += 1.0;

  std::vector<double> rhs = apply_permutation(perm, y.pixels());
  const lapack_int info =
      LAPACKE_dpbsv(LAPACK_COL_MAJOR, 'U', static_cast<lapack_int>(n), kd, 1, ab.data(), ldab,
                    rhs.data(), static_cast<lapack_int>(n));
  if (info != 0)
    throw std::runtime_error("l2_closed_form_oracle: banded solve failed, info=" +
                             std::to_string(info));
  return GrayImage(y.width(), y.height(), invert_permutation(perm, rhs));
}

}  // namespace patchreg
