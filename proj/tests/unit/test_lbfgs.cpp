#include <doctest.h>

#include <cmath>
#include <sstream>

#include "patchreg/lbfgs.hpp"
#include "test_util.hpp"

using namespace patchreg;

namespace {

// Random SPD matrix A = Q^T Q + dim * I (row-major).
std::vector<double> random_spd(std::size_t dim, std::uint64_t seed) {
  const auto q = testutil::random_vector(dim * dim, seed);
  std::vector<double> a(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t k = 0; k < dim; ++k) a[i * dim + j] += q[k * dim + i] * q[k * dim + j];
      if (i == j) a[i * dim + j] += 0.1 * static_cast<double>(dim);
    }
  return a;
}

ObjectiveFn quadratic(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = b.size();
  return [a, b, n](std::span<const double> x, std::span<double> g) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += a[i * n + j] * x[j];
      g[i] = ax - b[i];
      f += 0.5 * x[i] * ax - b[i] * x[i];
    }
    return f;
  };
}

double rosenbrock(std::span<const double> x, std::span<double> g) {
  const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  g[0] = -2.0 * a - 400.0 * x[0] * b;
  g[1] = 200.0 * b;
  return a * a + 100.0 * b * b;
}

void check_monotone(const LbfgsResult& r) {
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].f <= r.trace[i - 1].f);
}

}  // namespace

TEST_CASE("config validation") {
  LbfgsConfig c;
  CHECK_NOTHROW(c.validate());
  c.c2 = 1e-5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.m = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(LbfgsConfig{}.effective_grad_tol(1000) == doctest::Approx(1e-3));
}

TEST_CASE("two-loop recursion") {
  const std::vector<double> g{1.0, -2.0, 0.5};
  LbfgsHistory h(4);
  CHECK(two_loop_direction(h, g, 1.0) == std::vector<double>{-1.0, 2.0, -0.5});
  CHECK(two_loop_direction(h, g, 2.0) == std::vector<double>{-2.0, 4.0, -1.0});
  // One pair with s = y: H maps s to s and is h0 on the orthogonal complement.
  CHECK(h.push({1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}));
  const auto d = two_loop_direction(h, g, 1.0);
  CHECK(d[0] == doctest::Approx(-1.0));
  CHECK(d[1] == doctest::Approx(2.0));
  CHECK(d[2] == doctest::Approx(-0.5));
}

TEST_CASE("history skips non-positive curvature and evicts the oldest pair") {
  LbfgsHistory h(2);
  CHECK_FALSE(h.push({1.0, 0.0}, {-1.0, 0.0}));
  CHECK_FALSE(h.push({1.0, 0.0}, {0.0, 1.0}));
  CHECK(h.empty());
  CHECK(h.push({1.0, 0.0}, {2.0, 0.0}));
  CHECK(h.h0_scale() == doctest::Approx(0.5));
  CHECK(h.push({0.0, 1.0}, {0.0, 3.0}));
  CHECK(h.push({1.0, 1.0}, {1.0, 1.0}));
  CHECK(h.size() == 2);
  CHECK(h.s(0) == std::vector<double>{0.0, 1.0});
  CHECK(h.rho(1) == doctest::Approx(0.5));
}

TEST_CASE("newton direction after dim updates on a quadratic") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::size_t n = 5;
    const auto a = random_spd(n, seed);
    LbfgsHistory h(n);
    // A-conjugate steps (as exact line searches on a quadratic produce), y = A s.
    std::vector<std::vector<double>> dirs, adirs;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> s = testutil::random_vector(n, 10 * seed + k), y(n, 0.0);
      for (std::size_t q = 0; q < dirs.size(); ++q) {
        const double c = testutil::dot(s, adirs[q]) / testutil::dot(dirs[q], adirs[q]);
        for (std::size_t i = 0; i < n; ++i) s[i] -= c * dirs[q][i];
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += a[i * n + j] * s[j];
      CHECK(h.push(s, y));
      dirs.push_back(s);
      adirs.push_back(y);
    }
    const auto g = testutil::random_vector(n, 100 + seed);
    const auto d = two_loop_direction(h, g, h.h0_scale());
    // A d should equal -g.
    for (std::size_t i = 0; i < n; ++i) {
      double ad = 0.0;
      for (std::size_t j = 0; j < n; ++j) ad += a[i * n + j] * d[j];
      CHECK(std::fabs(ad + g[i]) < 1e-8);
    }
  }
}

TEST_CASE("line search on a 1D quadratic accepts the exact step") {
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    g[0] = x[0];
    return 0.5 * x[0] * x[0];
  };
  const std::vector<double> x{1.0}, g{1.0}, p{-1.0};
  const LineSearchResult r = wolfe_line_search(f, x, 0.5, g, p, 1.0, {});
  CHECK(r.status == LineSearchStatus::Satisfied);
  CHECK(r.alpha == 1.0);
  CHECK(r.f == 0.0);
  CHECK_THROWS_AS(wolfe_line_search(f, x, 0.5, g, std::vector<double>{1.0}, 1.0, {}), NonDescentDirection);
}

TEST_CASE("line search satisfies the strong Wolfe conditions from a poor first step") {
  const LbfgsConfig cfg;
  const std::vector<double> x{-1.2, 1.0};
  std::vector<double> g(2);
  const double f0 = rosenbrock(x, g);
  const std::vector<double> p{-g[0], -g[1]};
  for (double a0 : {1e-6, 1e-3, 1.0, 10.0}) {
    const LineSearchResult r = wolfe_line_search(rosenbrock, x, f0, g, p, a0, cfg);
    REQUIRE(r.status == LineSearchStatus::Satisfied);
    const double d0 = g[0] * p[0] + g[1] * p[1];
    CHECK(r.f <= f0 + cfg.c1 * r.alpha * d0);
    CHECK(std::fabs(r.g[0] * p[0] + r.g[1] * p[1]) <= -cfg.c2 * d0);
  }
}

TEST_CASE("line search exhaustion is reported") {
  // Discontinuous objective that increases just past the start.
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    g[0] = -1.0;
    return x[0] > 0.0 ? 1.0 : 0.0;
  };
  LbfgsConfig cfg;
  cfg.max_line_search_steps = 5;
  const std::vector<double> x{0.0}, g{-1.0}, p{1.0};
  const LineSearchResult r = wolfe_line_search(f, x, 0.0, g, p, 1.0, cfg);
  CHECK(r.status == LineSearchStatus::Exhausted);
  CHECK(r.alpha == 0.0);
  CHECK(r.x == x);
}

TEST_CASE("minimize rosenbrock") {
  LbfgsConfig cfg;
  cfg.grad_tol = 1e-10;
  const LbfgsResult r = minimize(rosenbrock, std::vector<double>{-1.2, 1.0}, cfg);
  CHECK(r.iterations <= 100);
  CHECK(std::fabs(r.x[0] - 1.0) < 1e-6);
  CHECK(std::fabs(r.x[1] - 1.0) < 1e-6);
  check_monotone(r);
}

TEST_CASE("minimize convex quadratics") {
  for (std::size_t dim : {2u, 5u, 12u, 20u}) {
    CAPTURE(dim);
    const auto a = random_spd(dim, dim);
    const auto b = testutil::random_vector(dim, 7 * dim);
    LbfgsConfig cfg;
    cfg.grad_tol = 1e-8;
    const LbfgsResult r = minimize(quadratic(a, b), std::vector<double>(dim, 0.0), cfg);
    CHECK(r.reason == StopReason::GradientTolerance);
    CHECK(r.iterations <= 200);
    // Ax = b
    for (std::size_t i = 0; i < dim; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < dim; ++j) ax += a[i * dim + j] * r.x[j];
      CHECK(std::fabs(ax - b[i]) < 1e-8);
    }
    check_monotone(r);
  }
}

TEST_CASE("already optimal start returns immediately") {
  const auto a = random_spd(3, 9);
  const LbfgsResult r = minimize(quadratic(a, {0, 0, 0}), std::vector<double>{0, 0, 0});
  CHECK(r.iterations == 0);
  CHECK(r.pairs_stored == 0);
  CHECK(r.reason == StopReason::GradientTolerance);
}

TEST_CASE("iteration cap and trace export") {
  LbfgsConfig cfg;
  cfg.max_iter = 3;
  cfg.grad_tol = 0.0;
  const LbfgsResult r = minimize(rosenbrock, std::vector<double>{-1.2, 1.0}, cfg);
  CHECK(r.iterations == 3);
  CHECK(r.reason == StopReason::MaxIterations);
  CHECK(r.trace.size() == 4);
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  CHECK(os.str().rfind("iteration,f,grad_inf\n0,", 0) == 0);
}
