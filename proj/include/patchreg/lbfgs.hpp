#pragma once

// Limited-memory BFGS with the two-loop recursion and a strong-Wolfe
// bracketing/zoom line search.

#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace patchreg {

/// f(x); the gradient is written into the second argument.
using ObjectiveFn = std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsConfig {
  std::size_t m = 8;
  double c1 = 1e-4;
  double c2 = 0.9;
  std::size_t max_iter = 300;
  /// Stop when ||g||_inf <= grad_tol. Defaults to 1e-6 * N.
  std::optional<double> grad_tol;
  std::size_t max_line_search_steps = 40;

  void validate() const;
  double effective_grad_tol(std::size_t n) const;
};

/// Thrown when the search direction is not a descent direction.
class NonDescentDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ring buffer of curvature pairs (s, y, rho = 1 / y^T s).
class LbfgsHistory {
 public:
  explicit LbfgsHistory(std::size_t capacity);

  /// Stores the pair unless y^T s <= 1e-12 ||s|| ||y||; evicts the oldest
  /// when full. Returns whether the pair was kept.
  bool push(std::vector<double> s, std::vector<double> y);
  void clear();

  std::size_t size() const { return s_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return s_.empty(); }
  /// s^T y / y^T y of the newest pair, 1 when empty.
  double h0_scale() const;

  const std::vector<double>& s(std::size_t i) const { return s_[i]; }
  const std::vector<double>& y(std::size_t i) const { return y_[i]; }
  double rho(std::size_t i) const { return rho_[i]; }

 private:
  std::size_t capacity_;
  std::deque<std::vector<double>> s_;
  std::deque<std::vector<double>> y_;
  std::deque<double> rho_;
};

/// -H grad, with H0 = h0_scale * I and the stored pairs oldest first.
std::vector<double> two_loop_direction(const LbfgsHistory& history, std::span<const double> grad,
                                       double h0_scale);

enum class LineSearchStatus { Satisfied, Exhausted };

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::Satisfied;
  double alpha = 0.0;
  double f = 0.0;
  std::vector<double> x;
  std::vector<double> g;
  std::size_t evaluations = 0;
};

/// Strong Wolfe search along p from x (value fx, gradient gx). On
/// exhaustion returns the best sufficient-decrease point seen, or alpha = 0
/// with the starting point if none was found.
LineSearchResult wolfe_line_search(const ObjectiveFn& f, std::span<const double> x, double fx,
                                   std::span<const double> gx, std::span<const double> p,
                                   double alpha0, const LbfgsConfig& cfg);

enum class StopReason { GradientTolerance, MaxIterations, LineSearchExhausted };
const char* stop_reason_name(StopReason r);

struct TraceEntry {
  std::size_t iteration = 0;
  double f = 0.0;
  double grad_inf = 0.0;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  double grad_inf = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t pairs_stored = 0;
  StopReason reason = StopReason::MaxIterations;
  std::vector<TraceEntry> trace;
};

LbfgsResult minimize(const ObjectiveFn& f, std::span<const double> x0, const LbfgsConfig& cfg = {});

/// CSV with header iteration,f,grad_inf.
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);

}  // namespace patchreg
