#pragma once

// Data-fidelity terms, smoothed bound penalties and the assembled
// restoration objective
//
//   F(x) = f(x) + mu * r_sm(x) + p_sm(x_min 1, x; lower mask) + p_sm(x, x_max 1)
//
// Every term function returns its value and ADDS its gradient into the
// supplied buffer, so callers can accumulate without temporaries.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "patchreg/forward_models.hpp"
#include "patchreg/image.hpp"
#include "patchreg/regularizer.hpp"

namespace patchreg {

/// 0.5 ||x - y||^2
double gaussian_term(std::span<const double> x, std::span<const double> y,
                     std::span<double> grad);

/// 0.5 ||A x - y||^2, gradient A^T (A x - y).
double linear_term(const GrayImage& x, const GrayImage& y, const LinearOperator& a,
                   std::span<double> grad);

/// Scalar negative log-likelihood -y log x + x, replaced below eps by its
/// second-order Taylor polynomial at eps. Returns {value, derivative}.
std::pair<double, double> poisson_scalar(double x, double y, double eps);

/// Sum of poisson_scalar over pixels. Counts must be non-negative.
double poisson_term(std::span<const double> x, std::span<const double> y, double eps,
                    std::span<double> grad);

/// c * sum_{k in mask} [rho(d_k, eps) + d_k], d = u - w. Empty mask means all
/// components. Either gradient span may be empty to skip it.
double bound_penalty_sm(std::span<const double> u, std::span<const double> w, double eps,
                        double c, std::span<const std::uint8_t> mask, std::span<double> grad_u,
                        std::span<double> grad_w);

enum class DataTerm { Gaussian, Linear, Poisson };

struct ObjectiveSpec {
  DataTerm data_term = DataTerm::Gaussian;
  double mu = 0.0;
  double epsilon_p = 1e-3;
  double epsilon_f = 1e-3;
  double c = 1.0;
  double x_min = 0.0;
  double x_max = 1.0;
  bool lower_penalty = true;
  bool upper_penalty = true;

  void validate() const;
};

struct ObjectiveBreakdown {
  double data = 0.0;
  double regularizer = 0.0;  // r_sm, before the mu factor
  double lower = 0.0;
  double upper = 0.0;
  double total = 0.0;
};

class RestorationObjective {
 public:
  /// `op` is required for DataTerm::Linear and ignored otherwise. `reg`
  /// may be null (mu is then irrelevant).
  RestorationObjective(ObjectiveSpec spec, GrayImage y, std::optional<LinearOperator> op,
                       std::shared_ptr<const PermutationRegularizer> reg);

  Dims dims() const { return dims_; }
  const ObjectiveSpec& spec() const { return spec_; }

  /// Value; `grad` (same size as x) is overwritten.
  double operator()(std::span<const double> x, std::span<double> grad) const;
  ObjectiveBreakdown breakdown(std::span<const double> x) const;

 private:
  ObjectiveBreakdown evaluate(std::span<const double> x, std::span<double> grad) const;

  ObjectiveSpec spec_;
  GrayImage y_;
  std::optional<LinearOperator> op_;
  std::shared_ptr<const PermutationRegularizer> reg_;
  Dims dims_;
  std::vector<std::uint8_t> lower_mask_;
};

}  // namespace patchreg
