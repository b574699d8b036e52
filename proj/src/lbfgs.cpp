#include "patchreg/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "patchreg/image.hpp"
#include "patchreg/simd.hpp"

namespace patchreg {

void LbfgsConfig::validate() const {
  if (m == 0) throw InvalidArgument("lbfgs: history length must be >= 1");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0))
    throw InvalidArgument("lbfgs: need 0 < c1 < c2 < 1");
  if (max_line_search_steps == 0) throw InvalidArgument("lbfgs: max_line_search_steps must be >= 1");
  if (grad_tol && !(*grad_tol >= 0.0)) throw InvalidArgument("lbfgs: grad_tol must be >= 0");
}

double LbfgsConfig::effective_grad_tol(std::size_t n) const {
  return grad_tol.value_or(1e-6 * static_cast<double>(n));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return simd::kernels().dot(a.data(), b.data(), a.size());
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

LbfgsHistory::LbfgsHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("LbfgsHistory: capacity must be >= 1");
}

bool LbfgsHistory::push(std::vector<double> s, std::vector<double> y) {
  if (s.size() != y.size()) throw InvalidArgument("LbfgsHistory: pair size mismatch");
  const double ys = dot(y, s);
  const double bound = 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y));
  if (!(ys > bound)) return false;
  if (s_.size() == capacity_) {
    s_.pop_front();
    y_.pop_front();
    rho_.pop_front();
  }
  s_.push_back(std::move(s));
  y_.push_back(std::move(y));
  rho_.push_back(1.0 / ys);
  return true;
}

void LbfgsHistory::clear() {
  s_.clear();
  y_.clear();
  rho_.clear();
}

double LbfgsHistory::h0_scale() const {
  if (s_.empty()) return 1.0;
  const double yy = dot(y_.back(), y_.back());
  return dot(s_.back(), y_.back()) / yy;
}

std::vector<double> two_loop_direction(const LbfgsHistory& history, std::span<const double> grad,
                                       double h0_scale) {
  const auto& k = simd::kernels();
  const std::size_t n = grad.size();
  std::vector<double> q(grad.begin(), grad.end());
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    if (history.s(i).size() != n) throw InvalidArgument("two_loop_direction: size mismatch");
    alpha[i] = history.rho(i) * k.dot(history.s(i).data(), q.data(), n);
    k.axpy(-alpha[i], history.y(i).data(), q.data(), n);
  }
  for (double& v : q) v *= h0_scale;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history.rho(i) * k.dot(history.y(i).data(), q.data(), n);
    k.axpy(alpha[i] - beta, history.s(i).data(), q.data(), n);
  }
  for (double& v : q) v = -v;
  return q;
}

namespace {

struct Probe {
  double alpha;
  double f;
  double dphi;
  std::vector<double> x;
  std::vector<double> g;
};

// Minimizer of the cubic through (a, fa, da), (b, fb, db), falling back to
// bisection when the interpolant is degenerate or lands outside the
// safeguarded interior of [a, b].
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double t = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) t = b - (b - a) * (db + d2 - d1) / denom;
  }
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
  return t;
}

// Root of the linear interpolant of phi' on [a, b], same safeguard as above.
double secant_step(double a, double da, double b, double db) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  double t = db != da ? a - da * (b - a) / (db - da) : 0.5 * (a + b);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
  return t;
}

}  // namespace

LineSearchResult wolfe_line_search(const ObjectiveFn& f, std::span<const double> x, double fx,
                                   std::span<const double> gx, std::span<const double> p,
                                   double alpha0, const LbfgsConfig& cfg) {
  const std::size_t n = x.size();
  if (gx.size() != n || p.size() != n) throw InvalidArgument("line search: size mismatch");
  const double d0 = dot(gx, p);
  if (!(d0 < 0.0)) throw NonDescentDirection("line search: direction is not a descent direction");
  if (!(alpha0 > 0.0)) throw InvalidArgument("line search: initial step must be positive");

  LineSearchResult res;
  const auto& k = simd::kernels();
  auto probe = [&](double alpha) {
    Probe pr{alpha, 0.0, 0.0, std::vector<double>(x.begin(), x.end()), std::vector<double>(n)};
    k.axpy(alpha, p.data(), pr.x.data(), n);
    pr.f = f(pr.x, pr.g);
    pr.dphi = dot(pr.g, p);
    ++res.evaluations;
    return pr;
  };

  std::optional<Probe> best;
  auto consider = [&](const Probe& pr) {
    if (std::isfinite(pr.f) && pr.f <= fx + cfg.c1 * pr.alpha * d0 && (!best || pr.f < best->f))
      best = pr;
  };
  auto accept = [&](Probe&& pr) {
    res.status = LineSearchStatus::Satisfied;
    res.alpha = pr.alpha;
    res.f = pr.f;
    res.x = std::move(pr.x);
    res.g = std::move(pr.g);
    return res;
  };
  auto strong_wolfe = [&](const Probe& pr) { return std::fabs(pr.dphi) <= -cfg.c2 * d0; };
  // Near a minimizer f differences drown in rounding; fall back to the
  // derivative form of sufficient decrease (Hager-Zhang approximate Wolfe).
  const double f_noise = 1e-12 * (std::fabs(fx) + 1.0);
  auto approx_wolfe = [&](const Probe& pr) {
    return std::isfinite(pr.f) && pr.f <= fx && fx - pr.f <= f_noise &&
           pr.dphi <= (1.0 - 2.0 * cfg.c1) * -d0 && strong_wolfe(pr);
  };
  auto in_noise = [&](const Probe& pr) {
    return std::isfinite(pr.f) && std::fabs(pr.f - fx) <= f_noise;
  };

  Probe lo{0.0, fx, d0, {}, {}};
  std::optional<Probe> hi;
  double alpha = alpha0;
  std::size_t steps = 0;
  Probe prev = lo;

  // Bracketing phase.
  while (steps < cfg.max_line_search_steps) {
    Probe cur = probe(alpha);
    ++steps;
    if (!std::isfinite(cur.f)) {
      // Overshot into a non-finite region: shrink toward the last good step.
      alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
      continue;
    }
    consider(cur);
    if (approx_wolfe(cur)) return accept(std::move(cur));
    if (in_noise(cur)) {
      // f carries no information here; bracket on the derivative sign.
      if (cur.dphi >= 0.0) {
        lo = prev;
        hi = std::move(cur);
        break;
      }
      prev = std::move(cur);
      alpha = 2.0 * prev.alpha;
      continue;
    }
    if (cur.f > fx + cfg.c1 * cur.alpha * d0 || (steps > 1 && cur.f >= prev.f)) {
      lo = prev;
      hi = std::move(cur);
      break;
    }
    if (strong_wolfe(cur)) return accept(std::move(cur));
    if (cur.dphi >= 0.0) {
      lo = std::move(cur);
      hi = prev;
      break;
    }
    prev = std::move(cur);
    alpha = 2.0 * prev.alpha;
  }

  // Zoom phase on [lo, hi]; lo always satisfies sufficient decrease and has
  // the lowest value seen in the bracket.
  while (hi && steps < cfg.max_line_search_steps) {
    if (std::fabs(hi->alpha - lo.alpha) <= 1e-16 * std::max(1.0, lo.alpha)) break;
    const bool noisy = in_noise(*hi) && (lo.alpha == 0.0 || in_noise(lo));
    const double t = noisy ? secant_step(lo.alpha, lo.dphi, hi->alpha, hi->dphi)
                           : cubic_step(lo.alpha, lo.f, lo.dphi, hi->alpha, hi->f, hi->dphi);
    Probe cur = probe(t);
    ++steps;
    consider(cur);
    if (approx_wolfe(cur)) return accept(std::move(cur));
    if (noisy && in_noise(cur)) {
      if (cur.dphi < 0.0) lo = std::move(cur);
      else hi = std::move(cur);
      continue;
    }
    if (!std::isfinite(cur.f) || cur.f > fx + cfg.c1 * cur.alpha * d0 || cur.f >= lo.f) {
      hi = std::move(cur);
      continue;
    }
    if (strong_wolfe(cur)) return accept(std::move(cur));
    if (cur.dphi * (hi->alpha - lo.alpha) >= 0.0) hi = lo;
    lo = std::move(cur);
  }

  res.status = LineSearchStatus::Exhausted;
  if (best) {
    res.alpha = best->alpha;
    res.f = best->f;
    res.x = std::move(best->x);
    res.g = std::move(best->g);
  } else {
    res.alpha = 0.0;
    res.f = fx;
    res.x.assign(x.begin(), x.end());
    res.g.assign(gx.begin(), gx.end());
  }
  return res;
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance:
      return "gradient_tolerance";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::LineSearchExhausted:
      return "line_search_exhausted";
  }
  return "unknown";
}

LbfgsResult minimize(const ObjectiveFn& f, std::span<const double> x0, const LbfgsConfig& cfg) {
  cfg.validate();
  const std::size_t n = x0.size();
  const double tol = cfg.effective_grad_tol(n);
  LbfgsResult out;
  out.x.assign(x0.begin(), x0.end());
  std::vector<double> g(n);
  out.f = f(out.x, g);
  out.evaluations = 1;
  if (!std::isfinite(out.f)) throw std::runtime_error("lbfgs: objective is not finite at x0");
  out.grad_inf = norm_inf(g);
  out.trace.push_back({0, out.f, out.grad_inf});

  LbfgsHistory hist(cfg.m);
  while (true) {
    if (out.grad_inf <= tol) {
      out.reason = StopReason::GradientTolerance;
      break;
    }
    if (out.iterations >= cfg.max_iter) {
      out.reason = StopReason::MaxIterations;
      break;
    }
    std::vector<double> p = two_loop_direction(hist, g, hist.h0_scale());
    if (!(dot(p, g) < 0.0)) {
      // Stale curvature information; restart from steepest descent.
      hist.clear();
      p = two_loop_direction(hist, g, 1.0);
    }
    const double alpha0 = hist.empty() ? 1.0 / std::max(1.0, std::sqrt(dot(g, g))) : 1.0;
    LineSearchResult ls = wolfe_line_search(f, out.x, out.f, g, p, alpha0, cfg);
    out.evaluations += ls.evaluations;
    if (ls.alpha > 0.0) {
      std::vector<double> s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = ls.x[i] - out.x[i];
        y[i] = ls.g[i] - g[i];
      }
      if (hist.push(std::move(s), std::move(y))) ++out.pairs_stored;
      out.x = std::move(ls.x);
      g = std::move(ls.g);
      out.f = ls.f;
      out.grad_inf = norm_inf(g);
      ++out.iterations;
      out.trace.push_back({out.iterations, out.f, out.grad_inf});
    }
    if (ls.status == LineSearchStatus::Exhausted) {
      out.reason = out.grad_inf <= tol ? StopReason::GradientTolerance
                                       : StopReason::LineSearchExhausted;
      break;
    }
  }
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
  os << "iteration,f,grad_inf\n";
  os.precision(17);
  for (const auto& t : trace) os << t.iteration << ',' << t.f << ',' << t.grad_inf << '\n';
}

}  // namespace patchreg
