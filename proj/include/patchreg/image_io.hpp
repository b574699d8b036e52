#pragma once

// Grayscale image files. PGM (P5, 8 or 16 bit) and PNG are read into
// [0, 1] by dividing by the container maximum; writing clamps to [0, 1]
// and quantizes. PFM ("Pf") stores raw float values and is used for data
// that must not be clipped or quantized (noisy observations, counts).

#include <string>

#include "patchreg/image.hpp"

namespace patchreg {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ImageFormat { Pgm, Png, Pfm };

/// From the file extension (.pgm, .png, .pfm; case-insensitive).
ImageFormat format_from_path(const std::string& path);

GrayImage read_pgm(const std::string& path);
GrayImage read_png(const std::string& path);
GrayImage read_pfm(const std::string& path);
/// Detects the format from the file signature.
GrayImage read_image(const std::string& path);

void write_pgm(const std::string& path, const GrayImage& img, int bit_depth = 8);
void write_png(const std::string& path, const GrayImage& img, int bit_depth = 8);
void write_pfm(const std::string& path, const GrayImage& img);
/// Format from the extension.
void write_image(const std::string& path, const GrayImage& img);

}  // namespace patchreg
