#include "patchreg/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include "patchreg/simd.hpp"

namespace patchreg {

Permutation::Permutation(std::vector<std::int32_t> order) : order_(std::move(order)) {
  const auto n = order_.size();
  inverse_.assign(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const auto idx = order_[k];
    if (idx < 0 || static_cast<std::size_t>(idx) >= n || inverse_[idx] != -1)
      throw InvalidArgument("Permutation: not a bijection at position " + std::to_string(k));
    inverse_[idx] = static_cast<std::int32_t>(k);
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::int32_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = static_cast<std::int32_t>(k);
  return Permutation(std::move(order));
}

std::vector<double> apply_permutation(const Permutation& perm, std::span<const double> v) {
  if (v.size() != perm.size()) throw InvalidArgument("apply_permutation: length mismatch");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[perm[k]];
  return out;
}

std::vector<double> invert_permutation(const Permutation& perm, std::span<const double> v) {
  if (v.size() != perm.size()) throw InvalidArgument("invert_permutation: length mismatch");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[perm[k]] = v[k];
  return out;
}

Permutation raster_order(Dims dims) { return Permutation::identity(dims.size()); }

Permutation zigzag_order(Dims dims) {
  std::vector<std::int32_t> order;
  order.reserve(dims.size());
  for (std::size_t r = 0; r < dims.height; ++r) {
    for (std::size_t i = 0; i < dims.width; ++i) {
      const std::size_t c = (r % 2 == 0) ? i : dims.width - 1 - i;
      order.push_back(static_cast<std::int32_t>(r * dims.width + c));
    }
  }
  return Permutation(std::move(order));
}

void OrderingParams::validate() const {
  if (window_side == 0 || window_side % 2 == 0)
    throw InvalidArgument("ordering: window side must be odd and positive");
  if (!(delta > 0.0)) throw InvalidArgument("ordering: delta must be positive");
}

std::pair<double, double> neighbor_probabilities(double d1_sq, double d2_sq, double delta) {
  // p1 = 1 / (1 + exp(-(d2 - d1) / delta)); identical to alpha * exp(-d1/delta)
  // without the underflow of the unnormalized weights.
  const double t = std::isinf(delta) ? 0.0 : (d2_sq - d1_sq) / delta;
  const double e = std::exp(-t);
  if (std::isinf(e)) return {0.0, 1.0};
  return {1.0 / (1.0 + e), e / (1.0 + e)};
}

namespace {

struct NearestTwo {
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
  std::int32_t i1 = std::numeric_limits<std::int32_t>::max();
  std::int32_t i2 = std::numeric_limits<std::int32_t>::max();

  void offer(double d, std::int32_t idx) {
    if (d < d1 || (d == d1 && idx < i1)) {
      d2 = d1;
      i2 = i1;
      d1 = d;
      i1 = idx;
    } else if (d < d2 || (d == d2 && idx < i2)) {
      d2 = d;
      i2 = idx;
    }
  }
};

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Permutation randomized_nn_order(const PatchSet& patches, const OrderingParams& params) {
  params.validate();
  const std::size_t n_patches = patches.count();
  if (n_patches == 0) throw InvalidArgument("randomized_nn_order: empty patch set");
  if (n_patches > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
    throw InvalidArgument("randomized_nn_order: too many patches");

  const auto width = static_cast<std::ptrdiff_t>(patches.source_dims().width);
  const auto height = static_cast<std::ptrdiff_t>(patches.source_dims().height);
  const auto half = static_cast<std::ptrdiff_t>(params.window_side / 2);
  const std::size_t dim = patches.patch_size();
  const auto& kern = simd::kernels();

  std::mt19937_64 rng(params.seed);
  std::vector<std::uint8_t> visited(n_patches, 0);
  // Unvisited indices in arbitrary order with O(1) removal, for the global
  // fallback scan.
  std::vector<std::int32_t> pool(n_patches);
  std::vector<std::int32_t> pool_pos(n_patches);
  for (std::size_t i = 0; i < n_patches; ++i) {
    pool[i] = static_cast<std::int32_t>(i);
    pool_pos[i] = static_cast<std::int32_t>(i);
  }
  auto visit = [&](std::int32_t idx) {
    visited[idx] = 1;
    const std::int32_t last = pool.back();
    pool[pool_pos[idx]] = last;
    pool_pos[last] = pool_pos[idx];
    pool.pop_back();
  };

  std::vector<std::int32_t> order;
  order.reserve(n_patches);
  const auto start = static_cast<std::int32_t>(rng() % n_patches);
  order.push_back(start);
  visit(start);

  while (order.size() < n_patches) {
    const std::int32_t cur = order.back();
    const double* zc = patches.data() + static_cast<std::size_t>(cur) * dim;
    const std::ptrdiff_t cr = cur / width;
    const std::ptrdiff_t cc = cur % width;
    const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, cr - half);
    const std::ptrdiff_t r1 = std::min<std::ptrdiff_t>(height - 1, cr + half);
    const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, cc - half);
    const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(width - 1, cc + half);

    NearestTwo best;
    std::size_t candidates = 0;
    for (std::ptrdiff_t r = r0; r <= r1; ++r) {
      const std::ptrdiff_t row = r * width;
      for (std::ptrdiff_t c = c0; c <= c1; ++c) {
        const auto idx = static_cast<std::int32_t>(row + c);
        if (visited[idx]) continue;
        ++candidates;
        best.offer(kern.squared_distance(zc, patches.data() + static_cast<std::size_t>(idx) * dim,
                                         dim),
                   idx);
      }
    }
    if (candidates == 0) {
      for (const std::int32_t idx : pool)
        best.offer(kern.squared_distance(zc, patches.data() + static_cast<std::size_t>(idx) * dim,
                                         dim),
                   idx);
      candidates = pool.size();
    }

    std::int32_t next = best.i1;
    if (candidates >= 2) {
      const auto [p1, p2] = neighbor_probabilities(best.d1, best.d2, params.delta);
      (void)p2;
      if (uniform01(rng) >= p1) next = best.i2;
    }
    order.push_back(next);
    visit(next);
  }
  return Permutation(std::move(order));
}

OrderingTv ordering_tv(std::span<const double> x, const Permutation& perm) {
  if (x.size() != perm.size()) throw InvalidArgument("ordering_tv: length mismatch");
  OrderingTv tv;
  for (std::size_t k = 1; k < x.size(); ++k) tv.total += std::fabs(x[perm[k]] - x[perm[k - 1]]);
  if (x.size() >= 2) tv.average = tv.total / static_cast<double>(x.size() - 1);
  return tv;
}

void write_permutation(std::ostream& os, const Permutation& perm) {
  for (const auto idx : perm.order()) os << idx << '\n';
}

Permutation read_permutation(std::istream& is) {
  std::vector<std::int32_t> order;
  long long v = 0;
  while (is >> v) {
    if (v < 0 || v > std::numeric_limits<std::int32_t>::max())
      throw InvalidArgument("read_permutation: index out of range");
    order.push_back(static_cast<std::int32_t>(v));
  }
  if (!is.eof()) throw InvalidArgument("read_permutation: malformed input");
  return Permutation(std::move(order));
}

void save_permutation(const std::string& path, const Permutation& perm) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_permutation(os, perm);
}

Permutation load_permutation(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_permutation(is);
}

}  // namespace patchreg
