#include "patchreg/forward_models.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace patchreg {

double Psf::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

Psf make_psf(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (rows == 0 || cols == 0 || rows % 2 == 0 || cols % 2 == 0)
    throw InvalidArgument("psf: dims must be odd");
  if (values.size() != rows * cols) throw InvalidArgument("psf: value count mismatch");
  const double s = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(s > 0.0)) throw InvalidArgument("psf: kernel sum must be positive");
  for (double& v : values) v /= s;
  return Psf{rows, cols, std::move(values)};
}

Psf uniform_psf(std::size_t side) { return make_psf(side, side, std::vector<double>(side * side, 1.0)); }

Psf gaussian_psf(std::size_t side, double stddev) {
  if (!(stddev > 0.0)) throw InvalidArgument("psf: stddev must be positive");
  const auto half = static_cast<double>(side / 2);
  std::vector<double> v(side * side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const double dr = static_cast<double>(r) - half;
      const double dc = static_cast<double>(c) - half;
      v[r * side + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * stddev * stddev));
    }
  return make_psf(side, side, std::move(v));
}

Psf gaussian_psf(double stddev) {
  auto side = static_cast<std::size_t>(std::ceil(6.0 * stddev));
  if (side % 2 == 0) ++side;
  return gaussian_psf(std::max<std::size_t>(side, 3), stddev);
}

Psf scenario_psf(int scenario) {
  switch (scenario) {
    case 1:
    case 2: {
      std::vector<double> v(15 * 15);
      for (int a = -7; a <= 7; ++a)
        for (int b = -7; b <= 7; ++b) v[(a + 7) * 15 + (b + 7)] = 1.0 / (1.0 + a * a + b * b);
      return make_psf(15, 15, std::move(v));
    }
    case 3:
      return uniform_psf(9);
    case 4: {
      const double k[5] = {1, 4, 6, 4, 1};
      std::vector<double> v(25);
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) v[a * 5 + b] = k[a] * k[b] / 256.0;
      return make_psf(5, 5, std::move(v));
    }
    case 5:
      return gaussian_psf(25, 1.6);
    case 6:
      return gaussian_psf(0.4);
    default:
      throw InvalidArgument("unknown blur scenario " + std::to_string(scenario));
  }
}

double scenario_noise_sigma(int scenario) {
  static const double variance[6] = {2.0, 8.0, 0.3, 49.0, 4.0, 64.0};
  if (scenario < 1 || scenario > 6)
    throw InvalidArgument("unknown blur scenario " + std::to_string(scenario));
  return std::sqrt(variance[scenario - 1]);
}

LinearOperator::LinearOperator(Dims in, Dims out, Map forward, Map adjoint)
    : in_(in), out_(out), forward_(std::move(forward)), adjoint_(std::move(adjoint)) {}

LinearOperator LinearOperator::identity(Dims dims) {
  auto id = [](const GrayImage& x) { return x; };
  return LinearOperator(dims, dims, id, id);
}

LinearOperator LinearOperator::compose(const LinearOperator& outer, const LinearOperator& inner) {
  if (inner.output_dims() != outer.input_dims())
    throw InvalidArgument("LinearOperator::compose: dims mismatch");
  return LinearOperator(
      inner.input_dims(), outer.output_dims(),
      [outer, inner](const GrayImage& x) { return outer.apply(inner.apply(x)); },
      [outer, inner](const GrayImage& u) { return inner.adjoint(outer.adjoint(u)); });
}

GrayImage LinearOperator::apply(const GrayImage& x) const {
  if (x.dims() != in_) throw InvalidArgument("LinearOperator::apply: dims mismatch");
  return forward_(x);
}

GrayImage LinearOperator::adjoint(const GrayImage& u) const {
  if (u.dims() != out_) throw InvalidArgument("LinearOperator::adjoint: dims mismatch");
  return adjoint_(u);
}

namespace {

GrayImage circular_filter(const GrayImage& img, const Psf& psf, bool flip) {
  if (psf.rows > img.height() || psf.cols > img.width())
    throw InvalidArgument("convolve: kernel larger than image");
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto kr = static_cast<std::ptrdiff_t>(psf.rows / 2);
  const auto kc = static_cast<std::ptrdiff_t>(psf.cols / 2);
  const std::ptrdiff_t sign = flip ? 1 : -1;
  // Periodic extension by the kernel radius so the inner loop needs no wrapping.
  const std::ptrdiff_t pw = w + 2 * kc;
  std::vector<double> pad(static_cast<std::size_t>((h + 2 * kr) * pw));
  for (std::ptrdiff_t r = 0; r < h + 2 * kr; ++r) {
    const double* src = img.storage().data() + ((r - kr) % h + h) % h * w;
    for (std::ptrdiff_t c = 0; c < pw; ++c) pad[r * pw + c] = src[((c - kc) % w + w) % w];
  }
  GrayImage out(img.dims());
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    double* orow = &out.at(static_cast<std::size_t>(r), 0);
    for (std::ptrdiff_t a = -kr; a <= kr; ++a) {
      const double* prow = pad.data() + (r + sign * a + kr) * pw + kc;
      const double* krow = psf.values.data() + (a + kr) * static_cast<std::ptrdiff_t>(psf.cols);
      for (std::ptrdiff_t b = -kc; b <= kc; ++b) {
        const double kv = krow[b + kc];
        const double* src = prow + sign * b;
        for (std::ptrdiff_t c = 0; c < w; ++c) orow[c] += kv * src[c];
      }
    }
  }
  return out;
}

}  // namespace

GrayImage convolve_circular(const GrayImage& img, const Psf& psf) {
  return circular_filter(img, psf, false);
}

GrayImage convolve_circular_adjoint(const GrayImage& img, const Psf& psf) {
  return circular_filter(img, psf, true);
}

LinearOperator blur_operator(const Psf& psf, Dims dims) {
  if (psf.rows > dims.height || psf.cols > dims.width)
    throw InvalidArgument("blur_operator: kernel larger than image");
  return LinearOperator(
      dims, dims, [psf](const GrayImage& x) { return convolve_circular(x, psf); },
      [psf](const GrayImage& u) { return convolve_circular_adjoint(u, psf); });
}

GrayImage downsample(const GrayImage& img, std::size_t factor) {
  if (factor == 0) throw InvalidArgument("downsample: factor must be positive");
  GrayImage out(img.width() / factor, img.height() / factor);
  for (std::size_t r = 0; r < out.height(); ++r)
    for (std::size_t c = 0; c < out.width(); ++c) out.at(r, c) = img.at(r * factor, c * factor);
  return out;
}

GrayImage downsample_adjoint(const GrayImage& img, std::size_t factor, Dims full) {
  if (factor == 0 || img.width() != full.width / factor || img.height() != full.height / factor)
    throw InvalidArgument("downsample_adjoint: dims mismatch");
  GrayImage out(full);
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c) out.at(r * factor, c * factor) = img.at(r, c);
  return out;
}

LinearOperator decimation_operator(Dims full, std::size_t factor) {
  const Dims low{full.width / factor, full.height / factor};
  return LinearOperator(
      full, low, [factor](const GrayImage& x) { return downsample(x, factor); },
      [factor, full](const GrayImage& u) { return downsample_adjoint(u, factor, full); });
}

GrayImage bin_image(const GrayImage& img, std::size_t b) {
  if (b == 0) throw InvalidArgument("bin_image: block size must be positive");
  const std::size_t ow = (img.width() + b - 1) / b;
  const std::size_t oh = (img.height() + b - 1) / b;
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  GrayImage out(ow, oh);
  for (std::size_t r = 0; r < oh * b; ++r) {
    const auto sr = static_cast<std::size_t>(reflect_index(static_cast<std::ptrdiff_t>(r), h));
    for (std::size_t c = 0; c < ow * b; ++c) {
      const auto sc = static_cast<std::size_t>(reflect_index(static_cast<std::ptrdiff_t>(c), w));
      out.at(r / b, c / b) += img.at(sr, sc);
    }
  }
  return out;
}

GrayImage unbin_upscale(const GrayImage& img, std::size_t b) {
  if (b == 0) throw InvalidArgument("unbin_upscale: block size must be positive");
  GrayImage out(img.width() * b, img.height() * b);
  const double scale = 1.0 / static_cast<double>(b * b);
  for (std::size_t r = 0; r < out.height(); ++r)
    for (std::size_t c = 0; c < out.width(); ++c) out.at(r, c) = img.at(r / b, c / b) * scale;
  return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma_255, std::uint64_t seed) {
  if (sigma_255 < 0.0) throw InvalidArgument("add_gaussian_noise: sigma must be non-negative");
  GrayImage out = img;
  if (sigma_255 == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma_255 / 255.0);
  for (double& v : out.storage()) v += noise(rng);
  return out;
}

GrayImage sample_poisson(const GrayImage& img, double peak, std::uint64_t seed,
                         std::optional<double> max_pix) {
  if (!(peak > 0.0)) throw InvalidArgument("sample_poisson: peak must be positive");
  const double mx = max_pix.value_or(img.max_value());
  if (!(mx > 0.0)) throw InvalidArgument("sample_poisson: image maximum must be positive");
  std::mt19937_64 rng(seed);
  GrayImage out(img.dims());
  for (std::size_t k = 0; k < img.size(); ++k) {
    const double lambda = std::max(0.0, peak * img[k] / mx);
    if (lambda == 0.0) continue;
    std::poisson_distribution<long long> dist(lambda);
    out[k] = static_cast<double>(dist(rng));
  }
  return out;
}

}  // namespace patchreg
