#include "patchreg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include "patchreg/metrics.hpp"

namespace patchreg {

const char* problem_name(Problem p) {
  switch (p) {
    case Problem::Gaussian:
      return "gauss";
    case Problem::Poisson:
      return "poisson";
    case Problem::Deblur:
      return "deblur";
    case Problem::SuperResolution:
      return "sr";
  }
  return "unknown";
}

Problem parse_problem(const std::string& s) {
  if (s == "gauss" || s == "gaussian") return Problem::Gaussian;
  if (s == "poisson") return Problem::Poisson;
  if (s == "deblur") return Problem::Deblur;
  if (s == "sr") return Problem::SuperResolution;
  throw ConfigError("unknown problem '" + s + "'");
}

void Preset::validate() const {
  if (patch_side == 0 || patch_side % 2 == 0) throw InvalidArgument("preset: patch_side must be odd");
  if (window == 0 || window % 2 == 0) throw InvalidArgument("preset: window must be odd");
  if (!(delta > 0.0)) throw InvalidArgument("preset: delta must be positive");
  regularizer_config().validate();
  if (!(epsilon_p > 0.0) || !(epsilon_f > 0.0)) throw InvalidArgument("preset: epsilons must be positive");
  if (!(c >= 0.0)) throw InvalidArgument("preset: c must be non-negative");
  if (!(mu >= 0.0)) throw InvalidArgument("preset: mu must be non-negative");
  if (!(sigma >= 0.0)) throw InvalidArgument("preset: sigma must be non-negative");
  if (scenario < 1 || scenario > 6) throw InvalidArgument("preset: scenario must be 1..6");
  if (sr_factor == 0) throw InvalidArgument("preset: sr_factor must be positive");
  if (!(peak > 0.0)) throw InvalidArgument("preset: peak must be positive");
  if (!(max_pix > 0.0)) throw InvalidArgument("preset: max_pix must be positive");
  if (binning && problem != Problem::Poisson) throw InvalidArgument("preset: binning applies to Poisson only");
  if (bin_factor == 0) throw InvalidArgument("preset: bin_factor must be positive");
  lbfgs.validate();
}

double Preset::x_max() const {
  if (problem != Problem::Poisson) return 1.0;
  const double b = binning ? static_cast<double>(bin_factor * bin_factor) : 1.0;
  return peak * b;
}

RegularizerConfig Preset::regularizer_config() const {
  RegularizerConfig r;
  r.gamma_edge = gamma_edge;
  r.g_thr = g_thr;
  r.m_max = m_max;
  r.epsilon_r = epsilon_r;
  return r;
}

namespace {

Preset common_intensity_preset(Problem p) {
  Preset s;
  s.problem = p;
  s.patch_side = 7;
  s.window = 121;
  s.delta = 1e6;
  s.gamma_edge = 1.5;
  s.g_thr = 3.5;
  s.m_max = 20.0;
  s.epsilon_r = 0.1;
  s.epsilon_p = 1e-3;
  s.c = 1.0;
  return s;
}

}  // namespace

Preset gaussian_preset(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_preset: sigma must be positive");
  Preset s = common_intensity_preset(Problem::Gaussian);
  s.sigma = sigma;
  // mu * 100 * n per noise level; linear in between, clamped outside.
  static const double sig[4] = {25, 50, 75, 100};
  static const double val[4] = {2.5, 5, 8, 12};
  double v = val[0];
  if (sigma >= sig[3]) {
    v = val[3];
  } else if (sigma > sig[0]) {
    for (int i = 0; i < 3; ++i)
      if (sigma <= sig[i + 1]) {
        const double t = (sigma - sig[i]) / (sig[i + 1] - sig[i]);
        v = val[i] + t * (val[i + 1] - val[i]);
        break;
      }
  }
  s.mu = v / (100.0 * static_cast<double>(s.patch_pixels()));
  return s;
}

Preset deblur_preset(int scenario) {
  static const double val[6] = {9, 24, 1.6, 140, 8, 500};
  if (scenario < 1 || scenario > 6) throw InvalidArgument("deblur_preset: scenario must be 1..6");
  Preset s = common_intensity_preset(Problem::Deblur);
  s.scenario = scenario;
  s.sigma = scenario_noise_sigma(scenario);
  s.mu = val[scenario - 1] / (1e5 * static_cast<double>(s.patch_pixels()));
  return s;
}

Preset sr_preset(bool noisy) {
  Preset s = common_intensity_preset(Problem::SuperResolution);
  s.sr_noisy = noisy;
  s.sigma = noisy ? 5.0 : 0.0;
  s.mu = (noisy ? 9.0 : 1.0) / (1e5 * static_cast<double>(s.patch_pixels()));
  return s;
}

Preset poisson_preset(double peak) {
  struct Row {
    double peak;
    std::optional<double> g_thr;
    double gamma_edge;
    double mu_n;
    bool binning;
  };
  static const Row rows[6] = {{4, 20.0, 2.5, 0.6, false},        {2, std::nullopt, 1.0, 0.9, false},
                              {1, std::nullopt, 1.0, 1.35, false}, {0.5, 10.0, 2.5, 0.55, true},
                              {0.2, std::nullopt, 1.0, 0.95, true}, {0.1, std::nullopt, 1.0, 1.15, true}};
  const Row* row = nullptr;
  for (const auto& r : rows)
    if (std::fabs(r.peak - peak) < 1e-9) row = &r;
  if (!row) throw InvalidArgument("poisson_preset: no table entry for peak " + std::to_string(peak));
  Preset s;
  s.problem = Problem::Poisson;
  s.peak = peak;
  s.binning = row->binning;
  s.patch_side = row->binning ? 7 : 9;
  s.window = row->binning ? 101 : 201;
  s.delta = 1e6;
  s.gamma_edge = row->gamma_edge;
  s.g_thr = row->g_thr;
  s.m_max = 5.0;
  s.epsilon_r = 0.1;
  s.epsilon_p = 1e-3;
  s.epsilon_f = 1e-3;
  s.c = 1.0;
  s.mu = row->mu_n / static_cast<double>(s.patch_pixels());
  return s;
}

Preset preset_by_name(const std::string& name) {
  const auto dash = name.find('-');
  const std::string head = name.substr(0, dash);
  const std::string tail = dash == std::string::npos ? "" : name.substr(dash + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad preset name '" + name + "'");
  };
  try {
    if (head == "gauss") return gaussian_preset(number(tail));
    if (head == "deblur") return deblur_preset(static_cast<int>(number(tail)));
    if (head == "poisson") return poisson_preset(number(tail));
    if (head == "sr" && tail.empty()) return sr_preset(false);
    if (head == "sr" && tail == "noisy") return sr_preset(true);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown preset '" + name + "'");
}

void apply_config(Preset& p, const ConfigMap& cfg) {
  static const std::set<std::string> reserved = {"preset", "problem", "input", "clean", "init",
                                                 "out",    "report",  "trace", "perm",  "rounds",
                                                 "schedule"};
  static const std::set<std::string> known = {
      "patch_side", "window",   "delta",    "gamma_edge", "g_thr",     "m_max",    "epsilon_r",
      "epsilon_p",  "epsilon_f", "c",       "mu",         "sigma",     "scenario", "sr_noisy",
      "sr_factor",  "peak",     "max_pix",  "binning",    "bin_factor", "seed",    "lbfgs_m",
      "lbfgs_c1",   "lbfgs_c2", "max_iter", "grad_tol",   "max_line_search_steps"};
  for (const auto& [k, v] : cfg.entries())
    if (!reserved.count(k) && !known.count(k)) throw ConfigError("unknown config key '" + k + "'");

  auto size_of = [&](const std::string& k, std::size_t& dst) {
    if (auto v = cfg.get_int(k)) {
      if (*v < 0) throw ConfigError("config key '" + k + "' must be non-negative");
      dst = static_cast<std::size_t>(*v);
    }
  };
  auto dbl = [&](const std::string& k, double& dst) {
    if (auto v = cfg.get_double(k)) dst = *v;
  };
  size_of("patch_side", p.patch_side);
  size_of("window", p.window);
  dbl("delta", p.delta);
  dbl("gamma_edge", p.gamma_edge);
  if (auto s = cfg.get_string("g_thr")) {
    if (*s == "none" || *s == "na" || *s == "N/A")
      p.g_thr.reset();
    else
      p.g_thr = cfg.get_double("g_thr");
  }
  dbl("m_max", p.m_max);
  dbl("epsilon_r", p.epsilon_r);
  dbl("epsilon_p", p.epsilon_p);
  dbl("epsilon_f", p.epsilon_f);
  dbl("c", p.c);
  dbl("mu", p.mu);
  dbl("sigma", p.sigma);
  if (auto v = cfg.get_int("scenario")) p.scenario = static_cast<int>(*v);
  if (auto v = cfg.get_bool("sr_noisy")) p.sr_noisy = *v;
  size_of("sr_factor", p.sr_factor);
  dbl("peak", p.peak);
  dbl("max_pix", p.max_pix);
  if (auto v = cfg.get_bool("binning")) p.binning = *v;
  size_of("bin_factor", p.bin_factor);
  if (auto v = cfg.get_int("seed")) {
    if (*v < 0) throw ConfigError("config key 'seed' must be non-negative");
    p.seed = static_cast<std::uint64_t>(*v);
  }
  size_of("lbfgs_m", p.lbfgs.m);
  dbl("lbfgs_c1", p.lbfgs.c1);
  dbl("lbfgs_c2", p.lbfgs.c2);
  size_of("max_iter", p.lbfgs.max_iter);
  if (auto v = cfg.get_double("grad_tol")) p.lbfgs.grad_tol = *v;
  size_of("max_line_search_steps", p.lbfgs.max_line_search_steps);
}

std::string describe_preset(const Preset& p) {
  std::ostringstream os;
  os.precision(17);
  os << "problem = " << problem_name(p.problem) << '\n'
     << "patch_side = " << p.patch_side << '\n'
     << "window = " << p.window << '\n'
     << "delta = " << p.delta << '\n'
     << "gamma_edge = " << p.gamma_edge << '\n';
  if (p.g_thr)
    os << "g_thr = " << *p.g_thr << '\n';
  else
    os << "g_thr = none\n";
  os << "m_max = " << p.m_max << '\n'
     << "epsilon_r = " << p.epsilon_r << '\n'
     << "epsilon_p = " << p.epsilon_p << '\n'
     << "epsilon_f = " << p.epsilon_f << '\n'
     << "c = " << p.c << '\n'
     << "mu = " << p.mu << '\n'
     << "sigma = " << p.sigma << '\n'
     << "scenario = " << p.scenario << '\n'
     << "sr_noisy = " << (p.sr_noisy ? "true" : "false") << '\n'
     << "sr_factor = " << p.sr_factor << '\n'
     << "peak = " << p.peak << '\n'
     << "max_pix = " << p.max_pix << '\n'
     << "binning = " << (p.binning ? "true" : "false") << '\n'
     << "bin_factor = " << p.bin_factor << '\n'
     << "seed = " << p.seed << '\n'
     << "lbfgs_m = " << p.lbfgs.m << '\n'
     << "lbfgs_c1 = " << p.lbfgs.c1 << '\n'
     << "lbfgs_c2 = " << p.lbfgs.c2 << '\n'
     << "max_iter = " << p.lbfgs.max_iter << '\n';
  if (p.lbfgs.grad_tol) os << "grad_tol = " << *p.lbfgs.grad_tol << '\n';
  os << "max_line_search_steps = " << p.lbfgs.max_line_search_steps << '\n';
  return os.str();
}

namespace {

Psf sr_psf() { return gaussian_psf(7, 1.6); }

}  // namespace

std::optional<LinearOperator> forward_operator(const Preset& p, Dims x_dims) {
  switch (p.problem) {
    case Problem::Deblur:
      return blur_operator(scenario_psf(p.scenario), x_dims);
    case Problem::SuperResolution:
      return LinearOperator::compose(decimation_operator(x_dims, p.sr_factor),
                                     blur_operator(sr_psf(), x_dims));
    default:
      return std::nullopt;
  }
}

Observation synthesize(const GrayImage& clean, const Preset& p, std::uint64_t seed) {
  p.validate();
  switch (p.problem) {
    case Problem::Gaussian:
      return {add_gaussian_noise(clean, p.sigma, seed), clean.dims()};
    case Problem::Deblur: {
      const auto op = forward_operator(p, clean.dims());
      return {add_gaussian_noise(op->apply(clean), p.sigma, seed), clean.dims()};
    }
    case Problem::SuperResolution: {
      const auto op = forward_operator(p, clean.dims());
      return {add_gaussian_noise(op->apply(clean), p.sr_noisy ? p.sigma : 0.0, seed),
              clean.dims()};
    }
    case Problem::Poisson:
      return {sample_poisson(clean, p.peak, seed), clean.dims()};
  }
  throw InvalidArgument("synthesize: unknown problem");
}

GrayImage to_unknown_scale(const GrayImage& intensity, const Preset& p) {
  if (p.problem != Problem::Poisson) return intensity;
  GrayImage lam = intensity;
  for (double& v : lam.storage()) v *= p.peak / p.max_pix;
  return p.binning ? bin_image(lam, p.bin_factor) : lam;
}

GrayImage to_intensity_scale(const GrayImage& x, const Preset& p, Dims out_dims) {
  if (p.problem != Problem::Poisson) return x;
  GrayImage full = p.binning ? unbin_upscale(x, p.bin_factor) : x;
  if (full.width() < out_dims.width || full.height() < out_dims.height)
    throw InvalidArgument("to_intensity_scale: output dims exceed the unknown");
  GrayImage out(out_dims);
  const double s = p.max_pix / p.peak;
  for (std::size_t r = 0; r < out_dims.height; ++r)
    for (std::size_t c = 0; c < out_dims.width; ++c) out.at(r, c) = full.at(r, c) * s;
  return out;
}

RestoreResult restore(const GrayImage& y, const GrayImage& init, const Preset& p) {
  using clock = std::chrono::steady_clock;
  p.validate();
  const Dims xd = init.dims();
  const GrayImage obs =
      p.problem == Problem::Poisson && p.binning ? bin_image(y, p.bin_factor) : y;
  const auto op = forward_operator(p, xd);
  if (op) {
    if (op->output_dims() != obs.dims())
      throw InvalidArgument("restore: init dims are inconsistent with the observation");
  } else if (obs.dims() != xd) {
    throw InvalidArgument("restore: init dims differ from the observation");
  }
  if (!init.all_finite() || !obs.all_finite())
    throw InvalidArgument("restore: non-finite input");

  const auto t0 = clock::now();
  const PatchSet patches = extract_patches(init, p.patch_side);
  OrderingParams op_params;
  op_params.window_side = p.window;
  op_params.delta = p.delta;
  op_params.seed = p.seed;
  Permutation perm = randomized_nn_order(patches, op_params);
  const RegularizerConfig rcfg = p.regularizer_config();
  const std::vector<double> gamma = edge_gamma(init, p.patch_side, rcfg);
  OrderingWeights weights = compute_weights(patches, perm, gamma, rcfg);
  const auto t1 = clock::now();

  auto reg = std::make_shared<const PermutationRegularizer>(xd, perm, weights.m, p.patch_side,
                                                            p.epsilon_r);
  ObjectiveSpec spec;
  spec.data_term = p.problem == Problem::Poisson ? DataTerm::Poisson
                   : op                          ? DataTerm::Linear
                                                 : DataTerm::Gaussian;
  spec.mu = p.mu;
  spec.epsilon_p = p.epsilon_p;
  spec.epsilon_f = p.epsilon_f;
  spec.c = p.c;
  spec.x_min = 0.0;
  spec.x_max = p.x_max();
  const RestorationObjective objective(spec, obs, op, reg);
  const ObjectiveFn fn = [&objective](std::span<const double> x, std::span<double> g) {
    return objective(x, g);
  };
  LbfgsResult res = minimize(fn, init.pixels(), p.lbfgs);
  const auto t2 = clock::now();

  if (!std::isfinite(res.f) ||
      !std::all_of(res.x.begin(), res.x.end(), [](double v) { return std::isfinite(v); }))
    throw NumericalFailure("restore: optimization produced non-finite values");

  RestoreResult out{GrayImage(), GrayImage(xd.width, xd.height, std::move(res.x)),
                    std::move(perm), std::move(weights), {}};
  out.report.iterations = res.iterations;
  out.report.evaluations = res.evaluations;
  out.report.stop_reason = res.reason;
  out.report.objective_init = res.trace.front().f;
  out.report.objective_final = res.f;
  out.report.final_breakdown = objective.breakdown(out.x.pixels());
  out.report.ordering_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.report.optimize_seconds = std::chrono::duration<double>(t2 - t1).count();
  out.report.trace = std::move(res.trace);
  out.image = to_intensity_scale(out.x, p, p.problem == Problem::Poisson ? y.dims() : xd);
  return out;
}

std::vector<double> default_self_schedule(std::size_t rounds) {
  // Weights of the initializer-free experiment, quoted as mu * 10^2.
  std::vector<double> s;
  for (std::size_t r = 0; r < rounds; ++r) s.push_back((r == 0 ? 0.45 : r == 1 ? 0.12 : 0.08) / 100.0);
  return s;
}

SelfRestoreResult self_init_restore(const GrayImage& y, const Preset& p,
                                    const std::vector<double>& mu_schedule,
                                    const std::optional<GrayImage>& clean) {
  if (p.problem != Problem::Gaussian)
    throw InvalidArgument("self_init_restore: Gaussian denoising only");
  if (mu_schedule.empty()) throw InvalidArgument("self_init_restore: empty schedule");
  if (clean) require_same_dims(y, *clean, "self_init_restore");
  SelfRestoreResult out;
  GrayImage current = y;
  for (std::size_t r = 0; r < mu_schedule.size(); ++r) {
    Preset q = p;
    q.mu = mu_schedule[r];
    q.seed = p.seed + r;
    RestoreResult res = restore(y, current, q);
    SelfRestoreRound round;
    round.mu = q.mu;
    if (clean) round.psnr = psnr(res.image, *clean);
    round.report = std::move(res.report);
    out.rounds.push_back(std::move(round));
    current = std::move(res.image);
  }
  out.image = std::move(current);
  return out;
}

}  // namespace patchreg
