#pragma once

// Degradation operators and noise synthesis for the four restoration
// problems: blur PSFs of the six deblurring scenarios, circular
// convolution, decimation, b x b binning, Gaussian and Poisson noise.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "patchreg/image.hpp"

namespace patchreg {

/// Odd-sized convolution kernel, row-major, normalized to unit sum.
struct Psf {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double sum() const;
};

/// Normalizes to unit sum and validates odd dims.
Psf make_psf(std::size_t rows, std::size_t cols, std::vector<double> values);
/// Deblurring scenarios 1..6.
Psf scenario_psf(int scenario);
/// Noise standard deviation of a scenario on the 0-255 scale.
double scenario_noise_sigma(int scenario);
Psf uniform_psf(std::size_t side);
Psf gaussian_psf(std::size_t side, double stddev);
/// Support ceil(6 * stddev), rounded up to odd, at least 3.
Psf gaussian_psf(double stddev);

/// Linear map between images with an explicit adjoint.
class LinearOperator {
 public:
  using Map = std::function<GrayImage(const GrayImage&)>;

  LinearOperator(Dims in, Dims out, Map forward, Map adjoint);

  static LinearOperator identity(Dims dims);
  /// outer ∘ inner
  static LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner);

  Dims input_dims() const { return in_; }
  Dims output_dims() const { return out_; }
  GrayImage apply(const GrayImage& x) const;
  GrayImage adjoint(const GrayImage& u) const;

 private:
  Dims in_;
  Dims out_;
  Map forward_;
  Map adjoint_;
};

/// Circular convolution with the kernel centered at its middle entry.
GrayImage convolve_circular(const GrayImage& img, const Psf& psf);
/// Adjoint: circular correlation (convolution with the flipped kernel).
GrayImage convolve_circular_adjoint(const GrayImage& img, const Psf& psf);
LinearOperator blur_operator(const Psf& psf, Dims dims);

/// Keeps pixel (i * factor, j * factor); output dims are floor(dims / factor).
GrayImage downsample(const GrayImage& img, std::size_t factor);
/// Places values back at the sampled sites of a `full` sized image, zeros elsewhere.
GrayImage downsample_adjoint(const GrayImage& img, std::size_t factor, Dims full);
LinearOperator decimation_operator(Dims full, std::size_t factor);

/// Sums over b x b blocks. Dims not divisible by b are mirror-padded up.
GrayImage bin_image(const GrayImage& img, std::size_t b);
/// Pixel replication to b x b blocks, divided by b^2.
GrayImage unbin_upscale(const GrayImage& img, std::size_t b);

/// y = x + N(0, (sigma / 255)^2), sigma on the 0-255 scale.
GrayImage add_gaussian_noise(const GrayImage& img, double sigma_255, std::uint64_t seed);

/// Poisson counts with mean peak * x / max_pix. max_pix defaults to max(x).
GrayImage sample_poisson(const GrayImage& img, double peak, std::uint64_t seed,
                         std::optional<double> max_pix = std::nullopt);

}  // namespace patchreg
