// Acceptance checks. One PASS/FAIL line per criterion; exit status is
// nonzero if any criterion fails.
//
//   patchreg_acceptance            all criteria
//   patchreg_acceptance AC2 AC5    a subset
//
// PATCHREG_FULL_ACCEPTANCE=1 runs AC3 on the full 512x512 image over five
// seeds (about 30 min on one core) instead of the 256x256 crop.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "patchreg/forward_models.hpp"
#include "patchreg/image_io.hpp"
#include "patchreg/lbfgs.hpp"
#include "patchreg/likelihoods.hpp"
#include "patchreg/metrics.hpp"
#include "patchreg/ordering.hpp"
#include "patchreg/pipeline.hpp"
#include "patchreg/regularizer.hpp"
#include "patchreg/simd.hpp"

using namespace patchreg;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string data_path(const std::string& name) {
  return std::string(PATCHREG_TEST_DATA_DIR) + "/" + name;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0,
                       double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  GrayImage img(w, h);
  for (std::size_t k = 0; k < img.size(); ++k) img[k] = u(rng);
  return img;
}

GrayImage crop(const GrayImage& img, std::size_t r0, std::size_t c0, Dims d) {
  return extract_subimage(img, {r0 + 1, c0 + 1}, d);
}

GrayImage center_crop(const GrayImage& img, std::size_t side) {
  if (img.width() <= side && img.height() <= side) return img;
  return crop(img, (img.height() - side) / 2, (img.width() - side) / 2, {side, side});
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

// ||g - g_fd||_2 / ||g_fd||_2 with coordinate-wise central differences.
double fd_relative_error(const ObjectiveFn& f, std::vector<double> x) {
  const std::size_t n = x.size();
  std::vector<double> g(n), scratch(n), fd(n);
  f(x, g);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x, scratch);
    x[i] = xi - h;
    const double fm = f(x, scratch);
    x[i] = xi;
    fd[i] = (fp - fm) / (2.0 * h);
  }
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = g[i] - fd[i];
  return norm2(diff) / std::max(norm2(fd), 1e-300);
}

std::shared_ptr<const PermutationRegularizer> preset_regularizer(const GrayImage& source,
                                                                 const Preset& p,
                                                                 std::size_t window) {
  const PatchSet ps = extract_patches(source, p.patch_side);
  OrderingParams op;
  op.window_side = window;
  op.delta = p.delta;
  op.seed = p.seed;
  const Permutation perm = randomized_nn_order(ps, op);
  const RegularizerConfig rc = p.regularizer_config();
  const auto gamma = edge_gamma(source, p.patch_side, rc);
  OrderingWeights w = compute_weights(ps, perm, gamma, rc);
  return std::make_shared<PermutationRegularizer>(source.dims(), perm, std::move(w.m),
                                                  p.patch_side, p.epsilon_r);
}

// ---------------------------------------------------------------------------

Outcome ac1_gradients() {
  const Dims d{24, 24};
  const GrayImage clean = crop(read_image(data_path("cameraman256.png")), 100, 100, d);
  Outcome out;
  double worst_all = 0.0;

  auto check = [&](const char* name, const Preset& p, const GrayImage& y,
                   std::optional<LinearOperator> op, DataTerm term, double lo, double hi) {
    ObjectiveSpec spec;
    spec.data_term = term;
    // Raised weight so the prior's gradient is not drowned by the data term.
    spec.mu = 1.0;
    spec.epsilon_p = p.epsilon_p;
    spec.epsilon_f = p.epsilon_f;
    spec.c = p.c;
    spec.x_max = p.x_max();
    const auto reg = preset_regularizer(to_unknown_scale(clean, p), p, 9);
    const RestorationObjective obj(spec, y, std::move(op), reg);
    const ObjectiveFn f = [&](std::span<const double> x, std::span<double> g) { return obj(x, g); };
    double worst = 0.0;
    for (std::uint64_t pt = 0; pt < 30; ++pt) {
      const GrayImage x = random_image(d.width, d.height, 1000 * pt + 17, lo, hi);
      worst = std::max(worst, fd_relative_error(f, x.storage()));
    }
    worst_all = std::max(worst_all, worst);
    out.detail += fmt("%s %.1e; ", name, worst);
    if (!(worst < 1e-5)) out.pass = false;
  };

  const Preset g = gaussian_preset(50);
  check("gauss", g, synthesize(clean, g, 1).y, std::nullopt, DataTerm::Gaussian, -0.2, 1.2);
  const Preset db = deblur_preset(1);
  check("deblur", db, synthesize(clean, db, 2).y, forward_operator(db, d), DataTerm::Linear, -0.2,
        1.2);
  const Preset sr = sr_preset(true);
  check("sr", sr, synthesize(clean, sr, 3).y, forward_operator(sr, d), DataTerm::Linear, -0.2, 1.2);
  Preset po = poisson_preset(4);
  po.max_pix = clean.max_value();
  check("poisson", po, synthesize(clean, po, 4).y, std::nullopt, DataTerm::Poisson, -0.3, 4.5);
  out.detail += fmt("max rel err %.2e (< 1e-5)", worst_all);
  return out;
}

Outcome ac2_oracle() {
  const Dims d{16, 16};
  const std::size_t n = d.size();
  Outcome out;
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    std::mt19937_64 rng(500 + t);
    std::vector<std::int32_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = static_cast<std::int32_t>(k);
    std::shuffle(order.begin(), order.end(), rng);
    const Permutation perm(order);
    const double mu = std::uniform_real_distribution<double>(0.5, 5.0)(rng);
    const GrayImage y = random_image(d.width, d.height, 900 + t);

    ObjectiveSpec spec;
    spec.mu = mu;
    spec.lower_penalty = false;
    spec.upper_penalty = false;
    RegularizerOptions ro;
    ro.accumulate_shifts = false;
    ro.penalty = simd::Penalty::Quadratic;
    const auto reg = std::make_shared<PermutationRegularizer>(d, perm, std::vector<double>(n, 1.0),
                                                              7, 0.1, ro);
    const RestorationObjective obj(spec, y, std::nullopt, reg);
    LbfgsConfig cfg;
    cfg.grad_tol = 1e-9;
    const LbfgsResult r =
        minimize([&](std::span<const double> x, std::span<double> g) { return obj(x, g); },
                 std::vector<double>(n, 0.5), cfg);
    const GrayImage expect = l2_closed_form_oracle(y, perm, mu);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(r.x[i] - expect[i]));
  }
  out.pass = worst < 1e-6;
  out.detail = fmt("max |x - x_closed| = %.2e over 10 permutations (< 1e-6)", worst);
  return out;
}

Outcome ac3_self_init() {
  const bool full = std::getenv("PATCHREG_FULL_ACCEPTANCE") != nullptr;
  const GrayImage lena = read_image(data_path("lena512.png"));
  const GrayImage clean = full ? lena : center_crop(lena, 256);
  const std::vector<std::uint64_t> seeds = full ? std::vector<std::uint64_t>{1, 2, 3, 4, 5}
                                                : std::vector<std::uint64_t>{1};
  double r1 = 0.0, r7 = 0.0;
  for (std::uint64_t s : seeds) {
    Preset p = gaussian_preset(50);
    p.seed = s;
    const GrayImage y = synthesize(clean, p, s).y;
    const SelfRestoreResult res = self_init_restore(y, p, default_self_schedule(7), clean);
    r1 += *res.rounds.front().psnr / static_cast<double>(seeds.size());
    r7 += *res.rounds.back().psnr / static_cast<double>(seeds.size());
    std::fprintf(stderr, "  AC3 seed %llu: round 1 %.3f dB, round 7 %.3f dB\n",
                 static_cast<unsigned long long>(s), *res.rounds.front().psnr,
                 *res.rounds.back().psnr);
  }
  Outcome out;
  if (full) {
    out.pass = std::fabs(r1 - 24.55) <= 0.5 && std::fabs(r7 - 27.62) <= 0.5;
    out.detail = fmt("512x512, 5 seeds: round 1 %.2f dB (24.55 +- 0.5), round 7 %.2f dB "
                     "(27.62 +- 0.5)", r1, r7);
  } else {
    out.pass = r7 - r1 >= 2.0;
    out.detail = fmt("256x256 crop: round 1 %.2f dB, round 7 %.2f dB, gain %.2f dB (>= 2)", r1, r7,
                     r7 - r1);
  }
  return out;
}

Outcome ac4_fixtures() {
  struct Ref {
    const char* image;
    double gains[3];  // sigma 50, 75, 100
  };
  // House is not shipped; Lena stands in with its own reference gains.
  const Ref refs[] = {{"cameraman256", {0.50, 0.65, 0.63}}, {"lena512", {0.12, 0.21, 0.29}}};
  const int sigmas[] = {50, 75, 100};
  Outcome out;
  double gain75 = 0.0;
  for (const Ref& ref : refs) {
    const GrayImage clean = read_image(data_path(std::string(ref.image) + ".png"));
    for (int k = 0; k < 3; ++k) {
      const std::string stem =
          data_path("fixtures/" + std::string(ref.image) + "_s" + std::to_string(sigmas[k]) + "_seed1");
      if (!std::filesystem::exists(stem + "_init.pfm")) {
        out.pass = false;
        out.detail += fmt("missing %s_init.pfm; ", stem.c_str());
        continue;
      }
      const GrayImage y = read_image(stem + "_noisy.pfm");
      const GrayImage init = read_image(stem + "_init.pfm");
      Preset p = gaussian_preset(sigmas[k]);
      p.seed = 1;
      const RestoreResult r = restore(y, init, p);
      const double before = psnr(init, clean), after = psnr(r.image, clean);
      const double gain = after - before;
      if (sigmas[k] == 75) gain75 += gain / 2.0;
      const bool ok = after >= before && std::fabs(gain - ref.gains[k]) <= 0.3;
      if (!ok) out.pass = false;
      out.detail += fmt("%s s%d %+.2f (ref %+.2f)%s; ", ref.image, sigmas[k], gain, ref.gains[k],
                        ok ? "" : " X");
    }
  }
  if (gain75 < 0.3) out.pass = false;
  out.detail += fmt("mean gain at s75 %+.2f (>= 0.3)", gain75);
  return out;
}

Outcome ac5_lbfgs() {
  Outcome out;
  auto monotone = [](const LbfgsResult& r) {
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      if (r.trace[i].f > r.trace[i - 1].f) return false;
    return true;
  };
  std::size_t worst_quad = 0;
  int runs = 0;
  for (simd::Backend b : {simd::Backend::Scalar, simd::Backend::Avx2}) {
    if (!simd::backend_available(b)) continue;
    simd::ScopedBackend scope(b);

    const ObjectiveFn rosen = [](std::span<const double> x, std::span<double> g) {
      const double a = 1.0 - x[0], c = x[1] - x[0] * x[0];
      g[0] = -2.0 * a - 400.0 * x[0] * c;
      g[1] = 200.0 * c;
      return a * a + 100.0 * c * c;
    };
    LbfgsConfig rc;
    rc.grad_tol = 1e-10;
    const LbfgsResult r = minimize(rosen, std::vector<double>{-1.2, 1.0}, rc);
    const double err = std::max(std::fabs(r.x[0] - 1.0), std::fabs(r.x[1] - 1.0));
    if (!(err < 1e-6 && r.iterations <= 100 && monotone(r))) out.pass = false;
    out.detail += fmt("%s: rosenbrock %zu it, err %.1e; ", std::string(simd::backend_name(b)).c_str(), r.iterations, err);

    for (std::size_t dim : {2, 5, 10, 15, 20}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        // A = Q diag(lambda) Q^T, lambda log-uniform in [1, 1e2].
        std::mt19937_64 rng(dim * 100 + seed);
        std::normal_distribution<double> nd;
        std::vector<std::vector<double>> q;
        while (q.size() < dim) {
          std::vector<double> v(dim);
          for (double& e : v) e = nd(rng);
          for (const auto& u : q) {
            double c = 0.0;
            for (std::size_t i = 0; i < dim; ++i) c += u[i] * v[i];
            for (std::size_t i = 0; i < dim; ++i) v[i] -= c * u[i];
          }
          const double nv = norm2(v);
          for (double& e : v) e /= nv;
          q.push_back(std::move(v));
        }
        std::vector<double> lam(dim), xstar(dim);
        std::uniform_real_distribution<double> ud(0.0, 2.0);
        for (double& l : lam) l = std::pow(10.0, ud(rng));
        for (double& e : xstar) e = nd(rng);
        std::vector<double> a(dim * dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k)
          for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) a[i * dim + j] += lam[k] * q[k][i] * q[k][j];
        // Written around the minimizer so f carries information down to |g| ~ 1e-8.
        const ObjectiveFn quad = [&](std::span<const double> x, std::span<double> g) {
          double f = 0.0;
          for (std::size_t i = 0; i < dim; ++i) {
            double ae = 0.0;
            for (std::size_t j = 0; j < dim; ++j) ae += a[i * dim + j] * (x[j] - xstar[j]);
            g[i] = ae;
            f += 0.5 * (x[i] - xstar[i]) * ae;
          }
          return f;
        };
        LbfgsConfig qc;
        qc.m = 8;
        qc.grad_tol = 1e-8;
        const LbfgsResult qr = minimize(quad, std::vector<double>(dim, 0.0), qc);
        ++runs;
        worst_quad = std::max(worst_quad, qr.iterations);
        if (!(qr.grad_inf < 1e-8 && qr.iterations <= 200 && monotone(qr))) {
          out.pass = false;
          out.detail += fmt("quad dim %zu seed %llu: %zu it, |g| %.1e, %s; ", dim,
                            static_cast<unsigned long long>(seed), qr.iterations, qr.grad_inf,
                            stop_reason_name(qr.reason));
        }
      }
    }
  }
  out.detail += fmt("%d quadratics, max %zu iterations (<= 200)", runs, worst_quad);
  return out;
}

Outcome ac6_ordering_quality() {
  const char* names[] = {"cameraman256", "lena512", "barbara", "monarch", "kodim23"};
  const Preset p = gaussian_preset(50);
  Outcome out;
  int tv_wins = 0, runs = 0;
  double worst_dom = 1.0;
  for (const char* name : names) {
    const GrayImage img = center_crop(read_image(data_path(std::string(name) + ".png")), 256);
    const PatchSet ps = extract_patches(img, p.patch_side);
    const RegularizerConfig rc = p.regularizer_config();
    const auto gamma = edge_gamma(img, p.patch_side, rc);
    const Permutation zz = zigzag_order(img.dims());
    const double raster_tv = ordering_tv(img.pixels(), raster_order(img.dims())).average;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      OrderingParams op;
      op.window_side = p.window;
      op.delta = p.delta;
      op.seed = seed;
      const Permutation nn = randomized_nn_order(ps, op);
      const double tv = ordering_tv(img.pixels(), nn).average;
      ++runs;
      if (tv < raster_tv) ++tv_wins;

      const OrderingWeights wn = compute_weights(ps, nn, gamma, rc);
      const auto ln = ordered_laplacian(img.pixels(), nn, wn.m);
      const auto lz = ordered_laplacian(img.pixels(), zz, wn.m);
      double top = 0.0;
      for (double v : ln) top = std::max(top, std::fabs(v));
      for (double v : lz) top = std::max(top, std::fabs(v));
      std::vector<double> thr(256);
      for (std::size_t j = 0; j < thr.size(); ++j) thr[j] = top * static_cast<double>(j) / 256.0;
      const TailDistribution tn = tail_distribution(img.pixels(), nn, wn.m, thr);
      const TailDistribution tz = tail_distribution(img.pixels(), zz, wn.m, thr);
      std::size_t below = 0;
      for (std::size_t j = 0; j < thr.size(); ++j)
        if (tn.probabilities[j] <= tz.probabilities[j]) ++below;
      const double frac = static_cast<double>(below) / static_cast<double>(thr.size());
      worst_dom = std::min(worst_dom, frac);
      std::fprintf(stderr, "  AC6 %s seed %llu: TV nn %.5f raster %.5f, tail below zig-zag %.1f%%\n",
                   name, static_cast<unsigned long long>(seed), tv, raster_tv, 100.0 * frac);
    }
  }
  out.pass = tv_wins == runs && worst_dom >= 0.9;
  out.detail = fmt("TV below raster in %d/%d runs; tail below zig-zag at >= %.1f%% of thresholds "
                   "(>= 90%%)", tv_wins, runs, 100.0 * worst_dom);
  return out;
}

// Plain greedy walk; returns nothing when some step has a near tie between the
// two best candidates, since then the delta -> 0 limit is a coin flip.
std::optional<std::vector<std::int32_t>> greedy_oracle(const PatchSet& ps, std::size_t window,
                                                       std::uint64_t seed) {
  const std::size_t n = ps.count();
  const long w = static_cast<long>(ps.source_dims().width);
  const long half = static_cast<long>(window / 2);
  std::mt19937_64 rng(seed);
  std::vector<bool> used(n, false);
  std::vector<std::int32_t> order{static_cast<std::int32_t>(rng() % n)};
  used[order[0]] = true;
  while (order.size() < n) {
    const long cur = order.back();
    long best = -1;
    double bd = std::numeric_limits<double>::infinity();
    double second = bd;
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const long r = static_cast<long>(i) / w, c = static_cast<long>(i) % w;
        if (pass == 0 && (std::labs(r - cur / w) > half || std::labs(c - cur % w) > half)) continue;
        double dist = 0.0;
        for (std::size_t t = 0; t < ps.patch_size(); ++t) {
          const double e = ps.patch(static_cast<std::size_t>(cur))[t] - ps.patch(i)[t];
          dist += e * e;
        }
        if (dist < bd) {
          second = bd;
          bd = dist;
          best = static_cast<long>(i);
        } else if (dist < second) {
          second = dist;
        }
      }
    }
    if (second - bd <= 1e-9 * std::max(bd, 1e-300)) return std::nullopt;
    used[static_cast<std::size_t>(best)] = true;
    order.push_back(static_cast<std::int32_t>(best));
  }
  return order;
}

Outcome ac7_permutations() {
  int bijections = 0, oracle_runs = 0, oracle_match = 0, tied_runs = 0;
  std::mt19937_64 rng(77);
  for (std::uint64_t run = 0; run < 1000; ++run) {
    const std::size_t w = 2 + rng() % 11, h = 2 + rng() % 11;
    const std::size_t side = std::min<std::size_t>(1 + 2 * (rng() % 3), 2 * std::min(w, h) - 1);
    const GrayImage img = random_image(w, h, 10000 + run);
    const PatchSet ps = extract_patches(img, side);
    OrderingParams op;
    op.window_side = 1 + 2 * (rng() % 6);
    op.delta = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 7.0)(rng));
    op.seed = run;
    const Permutation perm = randomized_nn_order(ps, op);
    std::vector<int> seen(w * h, 0);
    bool ok = perm.size() == w * h;
    for (std::size_t k = 0; ok && k < perm.size(); ++k) {
      const auto v = perm[k];
      ok = v >= 0 && static_cast<std::size_t>(v) < w * h && !seen[v];
      if (ok) seen[v] = 1;
    }
    if (ok) ++bijections;

    if (w * h <= 64) {
      op.delta = 1e-300;
      const Permutation greedy = randomized_nn_order(ps, op);
      const auto oracle = greedy_oracle(ps, op.window_side, op.seed);
      if (!oracle) {
        ++tied_runs;
        continue;
      }
      const auto& expect = *oracle;
      ++oracle_runs;
      if (std::equal(expect.begin(), expect.end(), greedy.order().begin(), greedy.order().end()))
        ++oracle_match;
    }
  }
  Outcome out;
  out.pass = bijections == 1000 && oracle_match == oracle_runs && oracle_runs > 0;
  out.detail = fmt("%d/1000 bijections; delta->0 matches greedy oracle in %d/%d runs (%d runs "
                   "with exact distance ties skipped)",
                   bijections, oracle_match, oracle_runs, tied_runs);
  return out;
}

Outcome ac8_seam_and_noise() {
  Outcome out;
  // Seam of the Poisson term at x = eps_f.
  const double eps = 1e-3;
  double jump_f = 0.0, jump_g = 0.0, model = 0.0;
  for (double y : {0.0, 0.5, 1.0, 3.0, 17.0}) {
    const double left = std::nextafter(eps, 0.0);
    const auto [fl, gl] = poisson_scalar(left, y, eps);
    const auto [fr, gr] = poisson_scalar(eps, y, eps);
    jump_f = std::max(jump_f, std::fabs(fl - fr));
    jump_g = std::max(jump_g, std::fabs(gl - gr));
    // Right side against -log likelihood, left side against its quadratic model.
    if (y > 0) {
      const double f_eps = eps - y * std::log(eps), g_eps = 1.0 - y / eps;
      const double xl = 0.25 * eps;
      const double q = f_eps + g_eps * (xl - eps) + 0.5 * y / (eps * eps) * (xl - eps) * (xl - eps);
      model = std::max(model, std::fabs(fr - f_eps) / std::fabs(f_eps));
      model = std::max(model, std::fabs(poisson_scalar(xl, y, eps).first - q) / std::fabs(q));
    }
  }
  const bool seam_ok = jump_f <= 1e-8 && jump_g <= 1e-8 && model <= 1e-12;
  out.detail += fmt("seam jumps f %.1e, f' %.1e; ", jump_f, jump_g);

  // Noisy PSNR at sigma = 100, unclipped, over images and seeds.
  const char* names[] = {"cameraman256", "lena512", "barbara", "monarch", "kodim23"};
  double avg = 0.0;
  int count = 0;
  for (const char* name : names) {
    const GrayImage clean = read_image(data_path(std::string(name) + ".png"));
    for (std::uint64_t s = 1; s <= 5; ++s) {
      avg += psnr(synthesize(clean, gaussian_preset(100), s).y, clean);
      ++count;
    }
  }
  avg /= count;
  const bool gauss_ok = std::fabs(avg - 8.13) <= 0.3;
  out.detail += fmt("sigma=100 noisy %.2f dB (8.13 +- 0.3); ", avg);

  // Poisson peak 4 on House: noisy image is y * max / peak.
  bool house_ok = false;
  auto poisson_noisy_psnr = [](const GrayImage& clean) {
    double s = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Preset p = poisson_preset(4);
      p.max_pix = clean.max_value();
      GrayImage y = synthesize(clean, p, seed).y;
      for (double& v : y.storage()) v *= p.max_pix / p.peak;
      s += psnr(y, clean) / 5.0;
    }
    return s;
  };
  const std::string house = data_path("house.png");
  if (std::filesystem::exists(house)) {
    const double v = poisson_noisy_psnr(read_image(house));
    house_ok = std::fabs(v - 8.40) <= 0.3;
    out.detail += fmt("House peak 4 noisy %.2f dB (8.40 +- 0.3)", v);
  } else {
    out.detail += fmt("House peak 4 NOT VERIFIABLE: tests/data/house.png not shipped "
                      "(cameraman %.2f dB, lena %.2f dB for reference)",
                      poisson_noisy_psnr(read_image(data_path("cameraman256.png"))),
                      poisson_noisy_psnr(read_image(data_path("lena512.png"))));
  }
  out.pass = seam_ok && gauss_ok && house_ok;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion all[] = {
      {"AC1", "gradient correctness", ac1_gradients},
      {"AC2", "closed-form oracle", ac2_oracle},
      {"AC3", "self-initialization", ac3_self_init},
      {"AC4", "improvement over init fixtures", ac4_fixtures},
      {"AC5", "L-BFGS benchmark", ac5_lbfgs},
      {"AC6", "ordering quality", ac6_ordering_quality},
      {"AC7", "permutation validity", ac7_permutations},
      {"AC8", "Poisson seam and noise levels", ac8_seam_and_noise},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  std::printf("simd backend: %s\n", std::string(simd::backend_name(simd::active_backend())).c_str());
  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s %s (%.1fs): %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
