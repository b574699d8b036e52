#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "patchreg/image.hpp"

namespace testutil {

inline patchreg::GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed,
                                        double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  patchreg::GrayImage img(w, h);
  for (double& v : img.storage()) v = u(rng);
  return img;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// Smooth test image: ramps plus a bright disc.
inline patchreg::GrayImage smooth_image(std::size_t w, std::size_t h) {
  patchreg::GrayImage img(w, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const double dr = static_cast<double>(r) - h / 2.0;
      const double dc = static_cast<double>(c) - w / 2.0;
      double v = 0.2 + 0.3 * static_cast<double>(c) / w + 0.1 * static_cast<double>(r) / h;
      if (dr * dr + dc * dc < (w * w) / 16.0) v += 0.35;
      img.at(r, c) = v;
    }
  return img;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

using ValueGrad = std::function<double(std::span<const double>, std::span<double>)>;

/// Worst relative error of the directional derivative along random
/// directions, central differences with step h.
inline double fd_directional_error(const ValueGrad& f, std::vector<double> x, std::uint64_t seed,
                                   int directions = 5, double h = 1e-6) {
  std::vector<double> g(x.size()), scratch(x.size());
  f(x, g);
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    const std::vector<double> dir = random_vector(x.size(), seed + d);
    std::vector<double> xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] += h * dir[i];
      xm[i] -= h * dir[i];
    }
    const double fd = (f(xp, scratch) - f(xm, scratch)) / (2.0 * h);
    const double an = dot(g, dir);
    worst = std::max(worst, std::fabs(fd - an) / std::max(1.0, std::fabs(an)));
  }
  return worst;
}

inline std::string data_path(const std::string& name) {
  return std::string(PATCHREG_TEST_DATA_DIR) + "/" + name;
}

}  // namespace testutil
