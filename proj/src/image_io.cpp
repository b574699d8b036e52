#include "patchreg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace patchreg {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string e = path.substr(dot + 1);
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t parse_size(const std::string& tok, const std::string& path) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(tok, &pos);
  } catch (const std::exception&) {
    throw ImageIoError(path + ": malformed header");
  }
  if (pos != tok.size()) throw ImageIoError(path + ": malformed header");
  return static_cast<std::size_t>(v);
}

double clamp01(double v) { return std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0); }

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
}

}  // namespace

ImageFormat format_from_path(const std::string& path) {
  const std::string e = lower_ext(path);
  if (e == "pgm") return ImageFormat::Pgm;
  if (e == "png") return ImageFormat::Png;
  if (e == "pfm") return ImageFormat::Pfm;
  throw ImageIoError(path + ": unsupported image extension");
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageIoError("cannot open " + path);
  if (header_token(is) != "P5") throw ImageIoError(path + ": not a binary PGM");
  const std::size_t w = parse_size(header_token(is), path);
  const std::size_t h = parse_size(header_token(is), path);
  const std::size_t maxval = parse_size(header_token(is), path);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535)
    throw ImageIoError(path + ": invalid PGM header");
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(w * h * bpp);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size()) throw ImageIoError(path + ": truncated");
  std::vector<double> px(w * h);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t k = 0; k < px.size(); ++k) {
    const unsigned v = bpp == 1 ? raw[k] : (unsigned{raw[2 * k]} << 8) | raw[2 * k + 1];
    px[k] = v * scale;
  }
  return GrayImage(w, h, std::move(px));
}

void write_pgm(const std::string& path, const GrayImage& img, int bit_depth) {
  check_depth(bit_depth);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ImageIoError("cannot open " + path + " for writing");
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  os << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(img.size() * (bit_depth / 8));
  for (double v : img.storage()) {
    const auto q = static_cast<unsigned>(std::lround(clamp01(v) * maxval));
    if (bit_depth == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xff));
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw ImageIoError(path + ": write failed");
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw ImageIoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageIoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageIoError("libpng: out of memory");
  }
  std::vector<unsigned char> data;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int depth = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError(path + ": invalid PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  data.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = data.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (png_uint_32 r = 0; r < h; ++r) {
    for (png_uint_32 c = 0; c < w; ++c) {
      double v;
      if (depth == 16) {
        std::uint16_t s;
        std::memcpy(&s, rows[r] + 2 * c, 2);
        v = s / 65535.0;
      } else {
        v = rows[r][c] / 255.0;
      }
      px[static_cast<std::size_t>(r) * w + c] = v;
    }
  }
  return GrayImage(w, h, std::move(px));
}

void write_png(const std::string& path, const GrayImage& img, int bit_depth) {
  check_depth(bit_depth);
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw ImageIoError("cannot open " + path + " for writing");
  const std::size_t bpp = bit_depth / 8;
  std::vector<unsigned char> data(img.size() * bpp);
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  for (std::size_t k = 0; k < img.size(); ++k) {
    const auto q = static_cast<unsigned>(std::lround(clamp01(img[k]) * maxval));
    if (bpp == 2) {
      data[2 * k] = static_cast<unsigned char>(q >> 8);
      data[2 * k + 1] = static_cast<unsigned char>(q & 0xff);
    } else {
      data[k] = static_cast<unsigned char>(q);
    }
  }
  std::vector<png_bytep> rows(img.height());
  for (std::size_t r = 0; r < img.height(); ++r) rows[r] = data.data() + r * img.width() * bpp;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageIoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ImageIoError("libpng: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError(path + ": PNG write failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// PFM rows are stored bottom to top; a negative scale marks little endian.
GrayImage read_pfm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageIoError("cannot open " + path);
  if (header_token(is) != "Pf") throw ImageIoError(path + ": not a grayscale PFM");
  const std::size_t w = parse_size(header_token(is), path);
  const std::size_t h = parse_size(header_token(is), path);
  double scale = 0.0;
  try {
    scale = std::stod(header_token(is));
  } catch (const std::exception&) {
    throw ImageIoError(path + ": malformed PFM scale");
  }
  if (w == 0 || h == 0 || scale == 0.0) throw ImageIoError(path + ": invalid PFM header");
  const bool little = scale < 0.0;
  std::vector<unsigned char> raw(w * h * 4);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size()) throw ImageIoError(path + ": truncated");
  const bool native_little = std::endian::native == std::endian::little;
  std::vector<double> px(w * h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      unsigned char b[4];
      std::memcpy(b, raw.data() + ((h - 1 - r) * w + c) * 4, 4);
      if (little != native_little) std::reverse(b, b + 4);
      float f;
      std::memcpy(&f, b, 4);
      px[r * w + c] = f;
    }
  return GrayImage(w, h, std::move(px));
}

void write_pfm(const std::string& path, const GrayImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ImageIoError("cannot open " + path + " for writing");
  const bool little = std::endian::native == std::endian::little;
  os << "Pf\n" << img.width() << ' ' << img.height() << '\n' << (little ? "-1.0" : "1.0") << '\n';
  for (std::size_t r = img.height(); r-- > 0;)
    for (std::size_t c = 0; c < img.width(); ++c) {
      const auto f = static_cast<float>(img.at(r, c));
      os.write(reinterpret_cast<const char*>(&f), 4);
    }
  if (!os) throw ImageIoError(path + ": write failed");
}

GrayImage read_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageIoError("cannot open " + path);
  unsigned char sig[8] = {};
  is.read(reinterpret_cast<char*>(sig), 8);
  is.close();
  if (sig[0] == 0x89 && sig[1] == 'P' && sig[2] == 'N' && sig[3] == 'G') return read_png(path);
  if (sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  if (sig[0] == 'P' && sig[1] == 'f') return read_pfm(path);
  throw ImageIoError(path + ": unrecognized image format");
}

void write_image(const std::string& path, const GrayImage& img) {
  switch (format_from_path(path)) {
    case ImageFormat::Pgm:
      return write_pgm(path, img);
    case ImageFormat::Png:
      return write_png(path, img);
    case ImageFormat::Pfm:
      return write_pfm(path, img);
  }
}

}  // namespace patchreg
