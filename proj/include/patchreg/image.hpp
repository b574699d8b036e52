#pragma once

// Grayscale image container and the pixel geometry shared by every other
// module: column stacking, symmetric mirror padding, shifted subimages and
// overlapping patch extraction.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchreg {

/// Thrown for malformed arguments: dimension mismatches, out-of-range
/// shifts, invalid parameter values.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Dims {
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t size() const { return width * height; }
  bool operator==(const Dims&) const = default;
};

/// Row-major 2D intensity grid. Pixel (r, c) lives at data[r * width + c].
/// Pixel indices used by permutations and patch sets refer to this
/// row-major enumeration.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);
  GrayImage(std::size_t width, std::size_t height, std::vector<double> data);
  explicit GrayImage(Dims dims, double fill = 0.0) : GrayImage(dims.width, dims.height, fill) {}

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  Dims dims() const { return {width_, height_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> pixels() { return data_; }
  std::span<const double> pixels() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double min_value() const;
  double max_value() const;
  bool all_finite() const;

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

void require_same_dims(const GrayImage& a, const GrayImage& b, const char* what);

/// Column-major vectorization (pixels of the first column first).
std::vector<double> column_stack(const GrayImage& img);
GrayImage unstack(std::span<const double> v, Dims dims);

/// Index into [0, n) after symmetric, edge-inclusive reflection:
/// ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...  Valid for -n <= i < 2n.
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

/// Symmetric (edge-inclusive) padding by `radius` pixels on every side.
GrayImage mirror_pad(const GrayImage& img, std::size_t radius);

/// Adjoint of mirror_pad: every padded pixel is accumulated back onto the
/// source pixel it was copied from.
GrayImage mirror_pad_adjoint(const GrayImage& padded, std::size_t radius, Dims orig);

/// The (i, j) shift of the subimage accumulation, 1-based, each in
/// [1, patch_side].
struct SubimageShift {
  std::size_t i = 1;
  std::size_t j = 1;
};

/// Window of size `orig` whose top-left corner sits at padded position
/// (i-1, j-1). With padding radius R, shift (R+1, R+1) returns the source.
GrayImage extract_subimage(const GrayImage& padded, SubimageShift shift, Dims orig);

/// All overlapping patch_side x patch_side patches, one centered at every
/// pixel of the mirror-padded source, in raster order of the center pixel.
/// Patch entries are stored row-major.
class PatchSet {
 public:
  PatchSet() = default;
  PatchSet(Dims source, std::size_t patch_side, std::vector<double> values);

  std::size_t patch_side() const { return side_; }
  std::size_t patch_size() const { return side_ * side_; }
  std::size_t count() const { return source_.size(); }
  Dims source_dims() const { return source_; }

  std::span<const double> patch(std::size_t k) const {
    return {values_.data() + k * patch_size(), patch_size()};
  }
  const double* data() const { return values_.data(); }

 private:
  Dims source_{};
  std::size_t side_ = 0;
  std::vector<double> values_;
};

PatchSet extract_patches(const GrayImage& img, std::size_t patch_side);

}  // namespace patchreg
