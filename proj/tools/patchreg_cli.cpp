// patchreg: command line front end.
//
//   patchreg synthesize   --problem gauss --sigma 50 --clean lena.png --out y.pfm
//   patchreg restore      --problem gauss --sigma 50 --input y.pfm --init bm3d.png --out x.png
//   patchreg self-restore --sigma 50 --input y.pfm --clean lena.png --out x.png
//   patchreg analyze      --input lena.png --tail tail.csv --mask tail.pgm
//
// Exit codes: 0 success, 2 bad configuration or input, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "patchreg/config.hpp"
#include "patchreg/image_io.hpp"
#include "patchreg/metrics.hpp"
#include "patchreg/pipeline.hpp"
#include "patchreg/simd.hpp"

using namespace patchreg;
using json = nlohmann::json;

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::string preset;
  std::string problem;
  std::optional<double> sigma;
  std::optional<double> peak;
  std::optional<int> scenario;
  std::optional<bool> bin;
  std::optional<bool> noisy;
  std::optional<double> mu;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iter;
  std::optional<double> max_pix;
  std::string input;
  std::string clean;
  std::string init;
  std::string out;
  std::string report;
  std::string trace;
  std::string perm;
  std::size_t rounds = 7;
  std::string schedule;
  std::string tail;
  std::string mask;
  std::string restored;
};

void add_problem_options(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "key = value configuration file");
  app->add_option("--preset", o.preset, "gauss-<sigma>, deblur-<1..6>, sr, sr-noisy, poisson-<peak>");
  app->add_option("--problem", o.problem, "gauss, poisson, deblur or sr");
  app->add_option("--sigma", o.sigma, "Gaussian noise level on the 0-255 scale");
  app->add_option("--peak", o.peak, "Poisson peak");
  app->add_option("--scenario", o.scenario, "deblurring scenario 1..6");
  app->add_flag("--bin,!--no-bin", o.bin, "3x3 binning for Poisson");
  app->add_flag("--noisy,!--noiseless", o.noisy, "super-resolution with noise");
  app->add_option("--mu", o.mu, "regularization weight (absolute)");
  app->add_option("--seed", o.seed, "ordering / noise seed");
  app->add_option("--max-iter", o.max_iter, "L-BFGS iteration cap");
  app->add_option("--max-pix", o.max_pix, "Poisson: intensity mapped to the peak count");
}

std::string first_nonempty(const std::string& a, const std::optional<std::string>& b) {
  if (!a.empty()) return a;
  return b.value_or("");
}

// Base preset from --preset / config "preset", else from the problem and
// its degradation parameter; then config overrides, then flag overrides.
Preset resolve_preset(const Options& o, ConfigMap& cfg) {
  if (!o.config.empty()) cfg = ConfigMap::load(o.config);
  const std::string name = first_nonempty(o.preset, cfg.get_string("preset"));
  Preset p;
  if (!name.empty()) {
    p = preset_by_name(name);
  } else {
    const std::string prob = first_nonempty(o.problem, cfg.get_string("problem"));
    if (prob.empty()) throw ConfigError("either --preset or --problem is required");
    try {
      switch (parse_problem(prob)) {
        case Problem::Gaussian:
          p = gaussian_preset(o.sigma ? *o.sigma : cfg.get_double("sigma").value_or(50.0));
          break;
        case Problem::Deblur:
          p = deblur_preset(o.scenario ? *o.scenario
                                       : static_cast<int>(cfg.get_int("scenario").value_or(1)));
          break;
        case Problem::SuperResolution:
          p = sr_preset(o.noisy ? *o.noisy : cfg.get_bool("sr_noisy").value_or(false));
          break;
        case Problem::Poisson:
          p = poisson_preset(o.peak ? *o.peak : cfg.get_double("peak").value_or(4.0));
          break;
      }
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  apply_config(p, cfg);
  if (o.sigma) p.sigma = *o.sigma;
  if (o.peak) p.peak = *o.peak;
  if (o.scenario) p.scenario = *o.scenario;
  if (o.bin) p.binning = *o.bin;
  if (o.noisy) {
    p.sr_noisy = *o.noisy;
    if (p.problem == Problem::SuperResolution && !cfg.contains("sigma") && !o.sigma)
      p.sigma = *o.noisy ? 5.0 : 0.0;
  }
  if (o.mu) p.mu = *o.mu;
  if (o.seed) p.seed = *o.seed;
  if (o.max_iter) p.lbfgs.max_iter = *o.max_iter;
  if (o.max_pix) p.max_pix = *o.max_pix;
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::string path_or_config(const std::string& flag, const ConfigMap& cfg, const char* key) {
  return first_nonempty(flag, cfg.get_string(key));
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw ImageIoError("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json quality(const GrayImage& x, const GrayImage& clean) {
  json q;
  q["psnr"] = number_or_null(psnr(x, clean));
  q["ssim"] = number_or_null(ssim(x, clean));
  GrayImage clamped = x;
  for (double& v : clamped.storage()) v = std::clamp(v, 0.0, 1.0);
  q["psnr_clamped"] = number_or_null(psnr(clamped, clean));
  return q;
}

// Observations for Poisson are counts; everything else is intensity.
GrayImage observation_as_intensity(const GrayImage& y, const Preset& p) {
  if (p.problem != Problem::Poisson) return y;
  GrayImage out = y;
  for (double& v : out.storage()) v *= p.max_pix / p.peak;
  return out;
}

GrayImage default_init(const GrayImage& y, const Preset& p) {
  switch (p.problem) {
    case Problem::SuperResolution: {
      GrayImage up(y.width() * p.sr_factor, y.height() * p.sr_factor);
      for (std::size_t r = 0; r < up.height(); ++r)
        for (std::size_t c = 0; c < up.width(); ++c)
          up.at(r, c) = y.at(r / p.sr_factor, c / p.sr_factor);
      return up;
    }
    case Problem::Poisson:
      return observation_as_intensity(y, p);
    default:
      return y;
  }
}

int run_synthesize(const Options& o) {
  ConfigMap cfg;
  const Preset p = resolve_preset(o, cfg);
  const std::string clean_path = path_or_config(o.clean.empty() ? o.input : o.clean, cfg, "clean");
  const std::string out = path_or_config(o.out, cfg, "out");
  if (clean_path.empty() || out.empty()) throw ConfigError("synthesize needs --clean and --out");
  const GrayImage clean = read_image(clean_path);
  const Observation obs = synthesize(clean, p, p.seed);
  write_image(out, obs.y);

  json rep;
  rep["problem"] = problem_name(p.problem);
  rep["seed"] = p.seed;
  rep["width"] = obs.y.width();
  rep["height"] = obs.y.height();
  if (p.problem == Problem::Poisson) {
    rep["peak"] = p.peak;
    rep["max_pix"] = clean.max_value();
    Preset q = p;
    q.max_pix = clean.max_value();
    rep["noisy_psnr"] = number_or_null(psnr(observation_as_intensity(obs.y, q), clean));
  } else if (obs.y.dims() == clean.dims()) {
    rep["noisy_psnr"] = number_or_null(psnr(obs.y, clean));
  }
  write_json(path_or_config(o.report, cfg, "report"), rep);
  std::cout << "wrote " << out << '\n';
  return 0;
}

json report_json(const RestoreReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["stop_reason"] = stop_reason_name(r.stop_reason);
  j["objective_init"] = r.objective_init;
  j["objective_final"] = r.objective_final;
  j["ordering_seconds"] = r.ordering_seconds;
  j["optimize_seconds"] = r.optimize_seconds;
  return j;
}

int run_restore(const Options& o) {
  ConfigMap cfg;
  Preset p = resolve_preset(o, cfg);
  const std::string in = path_or_config(o.input, cfg, "input");
  const std::string out = path_or_config(o.out, cfg, "out");
  if (in.empty() || out.empty()) throw ConfigError("restore needs --input and --out");
  const GrayImage y = read_image(in);
  const std::string clean_path = path_or_config(o.clean, cfg, "clean");
  std::optional<GrayImage> clean;
  if (!clean_path.empty()) clean = read_image(clean_path);
  if (clean && p.problem == Problem::Poisson && !o.max_pix && !cfg.contains("max_pix"))
    p.max_pix = clean->max_value();

  const std::string init_path = path_or_config(o.init, cfg, "init");
  const GrayImage init_intensity = init_path.empty() ? default_init(y, p) : read_image(init_path);
  const GrayImage init = to_unknown_scale(init_intensity, p);

  const auto t0 = std::chrono::steady_clock::now();
  const RestoreResult res = restore(y, init, p);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_image(out, res.image);

  if (res.report.stop_reason == StopReason::LineSearchExhausted)
    std::cerr << "warning: line search exhausted after " << res.report.iterations
              << " iterations; returning the best iterate\n";
  const std::string trace = path_or_config(o.trace, cfg, "trace");
  if (!trace.empty()) {
    std::ofstream os(trace);
    if (!os) throw ImageIoError("cannot open " + trace + " for writing");
    write_trace_csv(os, res.report.trace);
  }
  const std::string perm_path = path_or_config(o.perm, cfg, "perm");
  if (!perm_path.empty()) save_permutation(perm_path, res.perm);

  json rep = report_json(res.report);
  rep["problem"] = problem_name(p.problem);
  rep["mu"] = p.mu;
  rep["seed"] = p.seed;
  rep["wall_seconds"] = wall;
  rep["simd_backend"] = simd::backend_name(simd::active_backend());
  if (clean) {
    rep["before"] = quality(init_intensity, *clean);
    rep["after"] = quality(res.image, *clean);
  }
  write_json(path_or_config(o.report, cfg, "report"), rep);
  std::cout << "iterations " << res.report.iterations << ", f " << res.report.objective_init
            << " -> " << res.report.objective_final;
  if (clean) std::cout << ", PSNR " << psnr(res.image, *clean) << " dB";
  std::cout << '\n';
  return 0;
}

std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad --schedule entry '" + tok + "'");
    }
  }
  return out;
}

int run_self_restore(const Options& o) {
  Options q = o;
  if (q.preset.empty() && q.problem.empty()) q.problem = "gauss";
  ConfigMap cfg;
  const Preset p = resolve_preset(q, cfg);
  const std::string in = path_or_config(o.input, cfg, "input");
  const std::string out = path_or_config(o.out, cfg, "out");
  if (in.empty() || out.empty()) throw ConfigError("self-restore needs --input and --out");
  const GrayImage y = read_image(in);
  const std::string clean_path = path_or_config(o.clean, cfg, "clean");
  std::optional<GrayImage> clean;
  if (!clean_path.empty()) clean = read_image(clean_path);
  const std::string sched = first_nonempty(o.schedule, cfg.get_string("schedule"));
  const std::vector<double> schedule =
      sched.empty() ? default_self_schedule(o.rounds) : parse_schedule(sched);

  const SelfRestoreResult res = self_init_restore(y, p, schedule, clean);
  write_image(out, res.image);
  json rep;
  rep["rounds"] = json::array();
  for (std::size_t r = 0; r < res.rounds.size(); ++r) {
    json j = report_json(res.rounds[r].report);
    j["round"] = r + 1;
    j["mu"] = res.rounds[r].mu;
    if (res.rounds[r].psnr) j["psnr"] = number_or_null(*res.rounds[r].psnr);
    rep["rounds"].push_back(j);
    std::cout << "round " << r + 1 << " mu " << res.rounds[r].mu;
    if (res.rounds[r].psnr) std::cout << " PSNR " << *res.rounds[r].psnr << " dB";
    std::cout << '\n';
  }
  if (clean) rep["after"] = quality(res.image, *clean);
  write_json(path_or_config(o.report, cfg, "report"), rep);
  return 0;
}

int run_analyze(const Options& o) {
  Options q = o;
  if (q.preset.empty() && q.problem.empty()) q.problem = "gauss";
  ConfigMap cfg;
  const Preset p = resolve_preset(q, cfg);
  const std::string in = path_or_config(o.input, cfg, "input");
  if (in.empty()) throw ConfigError("analyze needs --input");
  const GrayImage img = read_image(in);
  const PatchSet patches = extract_patches(img, p.patch_side);

  const std::string perm_path = path_or_config(o.perm, cfg, "perm");
  Permutation perm = Permutation::identity(img.size());
  if (!perm_path.empty()) {
    perm = load_permutation(perm_path);
    if (perm.size() != img.size()) throw ConfigError("permutation size does not match the image");
  } else {
    OrderingParams op;
    op.window_side = p.window;
    op.delta = p.delta;
    op.seed = p.seed;
    perm = randomized_nn_order(patches, op);
  }
  const RegularizerConfig rcfg = p.regularizer_config();
  const std::vector<double> gamma = edge_gamma(img, p.patch_side, rcfg);
  const OrderingWeights w = compute_weights(patches, perm, gamma, rcfg);
  const Permutation zz = zigzag_order(img.dims());
  const OrderingWeights wz = compute_weights(patches, zz, gamma, rcfg);

  std::optional<GrayImage> restored;
  const std::string restored_path = first_nonempty(o.restored, cfg.get_string("restored"));
  if (!restored_path.empty()) restored = read_image(restored_path);
  const OrderingDiagnostics d = ordering_diagnostics(img, perm, p.patch_side, restored);

  const std::string tail = first_nonempty(o.tail, cfg.get_string("tail"));
  if (!tail.empty()) {
    const TailDistribution t = tail_distribution(img.pixels(), perm, w.m);
    const TailDistribution tz = tail_distribution(img.pixels(), zz, wz.m, t.thresholds);
    std::ofstream os(tail);
    if (!os) throw ImageIoError("cannot open " + tail + " for writing");
    os << "threshold,probability_nn,probability_zigzag\n";
    os.precision(17);
    for (std::size_t i = 0; i < t.thresholds.size(); ++i)
      os << t.thresholds[i] << ',' << t.probabilities[i] << ',' << tz.probabilities[i] << '\n';
  }
  const std::string mask = first_nonempty(o.mask, cfg.get_string("mask"));
  if (!mask.empty()) write_pgm(mask, d.tail_mask);

  json rep;
  rep["tv_nn"] = ordering_tv(img.pixels(), perm).average;
  rep["tv_raster"] = ordering_tv(img.pixels(), raster_order(img.dims())).average;
  rep["tv_zigzag"] = ordering_tv(img.pixels(), zz).average;
  rep["all_shift_tail_count"] = d.all_shift_count;
  rep["all_shift_tail_fraction"] = d.all_shift_fraction;
  if (!d.group_mse.empty()) rep["group_mse"] = d.group_mse;
  write_json(path_or_config(o.report, cfg, "report"), rep);
  std::cout << "average |grad| along ordering: NN " << rep["tv_nn"].get<double>() << ", raster "
            << rep["tv_raster"].get<double>() << "; last-15% in all shifts: "
            << 100.0 * d.all_shift_fraction << "%\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-ordering regularized image restoration"};
  app.require_subcommand(1);
  Options o;

  auto* syn = app.add_subcommand("synthesize", "degrade a clean image");
  add_problem_options(syn, o);
  syn->add_option("--clean,--input", o.clean, "clean image");
  syn->add_option("--out", o.out, "observation (use .pfm to keep it unclipped)");
  syn->add_option("--report", o.report, "JSON report");

  auto* res = app.add_subcommand("restore", "restore from an observation and an initialization");
  add_problem_options(res, o);
  res->add_option("--input", o.input, "observation");
  res->add_option("--init", o.init, "initialization (intensity scale)");
  res->add_option("--clean", o.clean, "ground truth for the report");
  res->add_option("--out", o.out, "restored image");
  res->add_option("--report", o.report, "JSON report");
  res->add_option("--trace", o.trace, "convergence CSV");
  res->add_option("--perm", o.perm, "write the ordering");

  auto* self = app.add_subcommand("self-restore", "initializer-free Gaussian denoising");
  add_problem_options(self, o);
  self->add_option("--input", o.input, "noisy observation");
  self->add_option("--clean", o.clean, "ground truth for per-round PSNR");
  self->add_option("--out", o.out, "restored image");
  self->add_option("--report", o.report, "JSON report");
  self->add_option("--rounds", o.rounds, "number of rounds")->check(CLI::PositiveNumber);
  self->add_option("--schedule", o.schedule, "comma separated mu per round");

  auto* ana = app.add_subcommand("analyze", "ordering diagnostics on a clean image");
  add_problem_options(ana, o);
  ana->add_option("--input", o.input, "clean image");
  ana->add_option("--perm", o.perm, "use this ordering instead of computing one");
  ana->add_option("--restored", o.restored, "restored image for per-group MSE");
  ana->add_option("--tail", o.tail, "tail distribution CSV (NN vs zig-zag)");
  ana->add_option("--mask", o.mask, "PGM mask of the last 15% of the ordering");
  ana->add_option("--report", o.report, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadConfig;
  }

  try {
    if (*syn) return run_synthesize(o);
    if (*res) return run_restore(o);
    if (*self) return run_self_restore(o);
    if (*ana) return run_analyze(o);
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NonDescentDirection& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const ImageIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
