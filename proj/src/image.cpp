#include "patchreg/image.hpp"

#include <algorithm>
#include <cmath>

namespace patchreg {

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw InvalidArgument("GrayImage: data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width_) + "x" +
                          std::to_string(height_));
  }
}

double GrayImage::min_value() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

double GrayImage::max_value() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

bool GrayImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_dims(const GrayImage& a, const GrayImage& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                          std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
}

std::vector<double> column_stack(const GrayImage& img) {
  std::vector<double> out;
  out.reserve(img.size());
  for (std::size_t c = 0; c < img.width(); ++c)
    for (std::size_t r = 0; r < img.height(); ++r) out.push_back(img.at(r, c));
  return out;
}

GrayImage unstack(std::span<const double> v, Dims dims) {
  if (v.size() != dims.size()) throw InvalidArgument("unstack: length does not match dims");
  GrayImage img(dims);
  std::size_t k = 0;
  for (std::size_t c = 0; c < dims.width; ++c)
    for (std::size_t r = 0; r < dims.height; ++r) img.at(r, c) = v[k++];
  return img;
}

GrayImage mirror_pad(const GrayImage& img, std::size_t radius) {
  if (radius > std::min(img.width(), img.height()))
    throw InvalidArgument("mirror_pad: radius exceeds image size");
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto rad = static_cast<std::ptrdiff_t>(radius);
  GrayImage out(img.width() + 2 * radius, img.height() + 2 * radius);
  for (std::ptrdiff_t r = 0; r < h + 2 * rad; ++r) {
    const auto sr = static_cast<std::size_t>(reflect_index(r - rad, h));
    for (std::ptrdiff_t c = 0; c < w + 2 * rad; ++c) {
      const auto sc = static_cast<std::size_t>(reflect_index(c - rad, w));
      out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = img.at(sr, sc);
    }
  }
  return out;
}

GrayImage mirror_pad_adjoint(const GrayImage& padded, std::size_t radius, Dims orig) {
  if (padded.width() != orig.width + 2 * radius || padded.height() != orig.height + 2 * radius)
    throw InvalidArgument("mirror_pad_adjoint: padded dims do not match");
  const auto w = static_cast<std::ptrdiff_t>(orig.width);
  const auto h = static_cast<std::ptrdiff_t>(orig.height);
  const auto rad = static_cast<std::ptrdiff_t>(radius);
  GrayImage out(orig);
  for (std::ptrdiff_t r = 0; r < h + 2 * rad; ++r) {
    const auto sr = static_cast<std::size_t>(reflect_index(r - rad, h));
    for (std::ptrdiff_t c = 0; c < w + 2 * rad; ++c) {
      const auto sc = static_cast<std::size_t>(reflect_index(c - rad, w));
      out.at(sr, sc) += padded.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
  return out;
}

GrayImage extract_subimage(const GrayImage& padded, SubimageShift shift, Dims orig) {
  if (shift.i < 1 || shift.j < 1 || shift.i - 1 + orig.height > padded.height() ||
      shift.j - 1 + orig.width > padded.width())
    throw InvalidArgument("extract_subimage: shift out of range");
  GrayImage out(orig);
  for (std::size_t r = 0; r < orig.height; ++r)
    for (std::size_t c = 0; c < orig.width; ++c)
      out.at(r, c) = padded.at(r + shift.i - 1, c + shift.j - 1);
  return out;
}

PatchSet::PatchSet(Dims source, std::size_t patch_side, std::vector<double> values)
    : source_(source), side_(patch_side), values_(std::move(values)) {
  if (values_.size() != source_.size() * side_ * side_)
    throw InvalidArgument("PatchSet: value count does not match dims");
}

PatchSet extract_patches(const GrayImage& img, std::size_t patch_side) {
  if (patch_side == 0 || patch_side % 2 == 0)
    throw InvalidArgument("extract_patches: patch side must be odd");
  if (img.empty()) throw InvalidArgument("extract_patches: empty image");
  const std::size_t radius = patch_side / 2;
  const GrayImage padded = mirror_pad(img, radius);
  const std::size_t n = patch_side * patch_side;
  std::vector<double> values(img.size() * n);
  double* dst = values.data();
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      // Center (r, c) sits at padded (r + radius, c + radius).
      for (std::size_t dr = 0; dr < patch_side; ++dr) {
        const double* row = &padded.storage()[(r + dr) * padded.width() + c];
        dst = std::copy(row, row + patch_side, dst);
      }
    }
  }
  return PatchSet(img.dims(), patch_side, std::move(values));
}

}  // namespace patchreg
