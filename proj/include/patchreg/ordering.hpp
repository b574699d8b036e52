#pragma once

// Pixel orderings induced by chaining overlapping patches along an
// approximate shortest path (randomized nearest-neighbor tour), plus the
// fixed scan orders used as baselines.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "patchreg/image.hpp"

namespace patchreg {

/// Bijection on {0..N-1}. order[k] is the row-major pixel index visited at
/// position k; inverse[order[k]] == k.
class Permutation {
 public:
  Permutation() = default;
  /// Validates bijectivity; throws InvalidArgument otherwise.
  explicit Permutation(std::vector<std::int32_t> order);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return order_.size(); }
  std::span<const std::int32_t> order() const { return order_; }
  std::span<const std::int32_t> inverse() const { return inverse_; }
  std::int32_t operator[](std::size_t k) const { return order_[k]; }

  bool operator==(const Permutation& o) const { return order_ == o.order_; }

 private:
  std::vector<std::int32_t> order_;
  std::vector<std::int32_t> inverse_;
};

/// (Pv)[k] = v[order[k]]
std::vector<double> apply_permutation(const Permutation& perm, std::span<const double> v);
/// Inverse of apply_permutation: out[order[k]] = v[k].
std::vector<double> invert_permutation(const Permutation& perm, std::span<const double> v);

/// Raster scan (row-major).
Permutation raster_order(Dims dims);
/// Horizontal zig-zag (boustrophedon): even rows left to right, odd rows
/// right to left.
Permutation zigzag_order(Dims dims);

struct OrderingParams {
  std::size_t window_side = 121;  // B, odd
  double delta = 1e6;             // squared-distance scale of the two-neighbor choice
  std::uint64_t seed = 0;

  void validate() const;
};

/// Probabilities of taking the nearest / second nearest candidate:
/// p_i proportional to exp(-d_i / delta), p1 + p2 = 1. Evaluated in the
/// overflow-safe logistic form, so delta -> 0+ gives (1, 0) when d1 < d2.
std::pair<double, double> neighbor_probabilities(double d1_sq, double d2_sq, double delta);

/// Randomized nearest-neighbor tour over the patches. Candidates are the
/// unvisited patches whose centers fall in the B x B window around the
/// current center; with exactly one candidate it is taken, with none the
/// search extends to every unvisited patch, otherwise one of the two
/// nearest (Euclidean patch distance) is drawn with
/// neighbor_probabilities(). Ties in distance go to the lower index.
/// Deterministic for a given seed.
Permutation randomized_nn_order(const PatchSet& patches, const OrderingParams& params);

struct OrderingTv {
  double total = 0.0;    // sum_k |x[order[k+1]] - x[order[k]]|
  double average = 0.0;  // total / (N - 1), 0 for N < 2
};

OrderingTv ordering_tv(std::span<const double> x, const Permutation& perm);

/// Newline-delimited decimal indices.
void write_permutation(std::ostream& os, const Permutation& perm);
Permutation read_permutation(std::istream& is);
void save_permutation(const std::string& path, const Permutation& perm);
Permutation load_permutation(const std::string& path);

}  // namespace patchreg
