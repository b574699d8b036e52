#include "patchreg/likelihoods.hpp"

#include <cmath>

namespace patchreg {

namespace {

void check_grad(std::span<double> grad, std::size_t n, const char* what) {
  if (grad.size() != n) throw InvalidArgument(std::string(what) + ": gradient size mismatch");
}

}  // namespace

double gaussian_term(std::span<const double> x, std::span<const double> y,
                     std::span<double> grad) {
  if (x.size() != y.size()) throw InvalidArgument("gaussian_term: dimension mismatch");
  check_grad(grad, x.size(), "gaussian_term");
  double v = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    v += d * d;
    grad[k] += d;
  }
  return 0.5 * v;
}

double linear_term(const GrayImage& x, const GrayImage& y, const LinearOperator& a,
                   std::span<double> grad) {
  if (x.dims() != a.input_dims() || y.dims() != a.output_dims())
    throw InvalidArgument("linear_term: dimension mismatch");
  check_grad(grad, x.size(), "linear_term");
  GrayImage r = a.apply(x);
  double v = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    r[k] -= y[k];
    v += r[k] * r[k];
  }
  const GrayImage g = a.adjoint(r);
  for (std::size_t k = 0; k < g.size(); ++k) grad[k] += g[k];
  return 0.5 * v;
}

std::pair<double, double> poisson_scalar(double x, double y, double eps) {
  if (y == 0.0) return {x, 1.0};
  if (x >= eps) return {x - y * std::log(x), 1.0 - y / x};
  const double f0 = eps - y * std::log(eps);
  const double f1 = 1.0 - y / eps;
  const double f2 = y / (eps * eps);
  const double t = x - eps;
  return {f0 + f1 * t + 0.5 * f2 * t * t, f1 + f2 * t};
}

double poisson_term(std::span<const double> x, std::span<const double> y, double eps,
                    std::span<double> grad) {
  if (x.size() != y.size()) throw InvalidArgument("poisson_term: dimension mismatch");
  if (!(eps > 0.0)) throw InvalidArgument("poisson_term: epsilon must be positive");
  check_grad(grad, x.size(), "poisson_term");
  double v = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (y[k] < 0.0) throw InvalidArgument("poisson_term: negative count");
    const auto [f, d] = poisson_scalar(x[k], y[k], eps);
    v += f;
    grad[k] += d;
  }
  return v;
}

double bound_penalty_sm(std::span<const double> u, std::span<const double> w, double eps,
                        double c, std::span<const std::uint8_t> mask, std::span<double> grad_u,
                        std::span<double> grad_w) {
  const std::size_t n = u.size();
  if (w.size() != n || (!mask.empty() && mask.size() != n))
    throw InvalidArgument("bound_penalty_sm: dimension mismatch");
  if (!grad_u.empty()) check_grad(grad_u, n, "bound_penalty_sm");
  if (!grad_w.empty()) check_grad(grad_w, n, "bound_penalty_sm");
  double v = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!mask.empty() && !mask[k]) continue;
    const double d = u[k] - w[k];
    v += rho(d, eps) + d;
    const double g = c * (rho_prime(d, eps) + 1.0);
    if (!grad_u.empty()) grad_u[k] += g;
    if (!grad_w.empty()) grad_w[k] -= g;
  }
  return c * v;
}

void ObjectiveSpec::validate() const {
  if (!(mu >= 0.0)) throw InvalidArgument("objective: mu must be non-negative");
  if (!(epsilon_p > 0.0) || !(epsilon_f > 0.0))
    throw InvalidArgument("objective: epsilons must be positive");
  if (!(c >= 0.0)) throw InvalidArgument("objective: c must be non-negative");
  if (!(x_min < x_max)) throw InvalidArgument("objective: x_min must be below x_max");
}

RestorationObjective::RestorationObjective(ObjectiveSpec spec, GrayImage y,
                                           std::optional<LinearOperator> op,
                                           std::shared_ptr<const PermutationRegularizer> reg)
    : spec_(spec), y_(std::move(y)), op_(std::move(op)), reg_(std::move(reg)) {
  spec_.validate();
  if (spec_.data_term == DataTerm::Linear) {
    if (!op_) throw InvalidArgument("objective: linear data term needs an operator");
    if (op_->output_dims() != y_.dims())
      throw InvalidArgument("objective: operator output does not match observation");
    dims_ = op_->input_dims();
  } else {
    dims_ = y_.dims();
  }
  if (reg_ && reg_->dims() != dims_)
    throw InvalidArgument("objective: regularizer dims do not match the unknown");
  if (spec_.data_term == DataTerm::Poisson) {
    lower_mask_.resize(y_.size());
    for (std::size_t k = 0; k < y_.size(); ++k) {
      if (y_[k] < 0.0) throw InvalidArgument("objective: negative Poisson count");
      lower_mask_[k] = y_[k] == 0.0 ? 1 : 0;
    }
  }
}

ObjectiveBreakdown RestorationObjective::evaluate(std::span<const double> x,
                                                  std::span<double> grad) const {
  if (x.size() != dims_.size()) throw InvalidArgument("objective: dimension mismatch");
  const bool want_grad = !grad.empty();
  std::vector<double> scratch;
  if (!want_grad) {
    scratch.assign(x.size(), 0.0);
    grad = scratch;
  } else {
    check_grad(grad, x.size(), "objective");
    std::fill(grad.begin(), grad.end(), 0.0);
  }

  ObjectiveBreakdown b;
  switch (spec_.data_term) {
    case DataTerm::Gaussian:
      b.data = gaussian_term(x, y_.pixels(), grad);
      break;
    case DataTerm::Linear: {
      const GrayImage xi(dims_.width, dims_.height, std::vector<double>(x.begin(), x.end()));
      b.data = linear_term(xi, y_, *op_, grad);
      break;
    }
    case DataTerm::Poisson:
      b.data = poisson_term(x, y_.pixels(), spec_.epsilon_f, grad);
      break;
  }
  if (reg_ && spec_.mu != 0.0)
    b.regularizer = want_grad ? reg_->accumulate(x, spec_.mu, grad) : reg_->value(x);
  else if (reg_)
    b.regularizer = reg_->value(x);

  if (spec_.lower_penalty) {
    const std::vector<double> lo(x.size(), spec_.x_min);
    b.lower = bound_penalty_sm(lo, x, spec_.epsilon_p, spec_.c, lower_mask_, {}, grad);
  }
  if (spec_.upper_penalty) {
    const std::vector<double> hi(x.size(), spec_.x_max);
    b.upper = bound_penalty_sm(x, hi, spec_.epsilon_p, spec_.c, {}, grad, {});
  }
  b.total = b.data + spec_.mu * b.regularizer + b.lower + b.upper;
  return b;
}

double RestorationObjective::operator()(std::span<const double> x,
                                        std::span<double> grad) const {
  if (grad.size() != x.size()) throw InvalidArgument("objective: gradient size mismatch");
  return evaluate(x, grad).total;
}

ObjectiveBreakdown RestorationObjective::breakdown(std::span<const double> x) const {
  return evaluate(x, {});
}

}  // namespace patchreg
