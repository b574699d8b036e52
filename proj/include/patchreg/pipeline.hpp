#pragma once

// End-to-end restoration: parameter presets, problem synthesis, the
// ordering -> weights -> objective -> L-BFGS driver, and the
// initializer-free self-restoration loop.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchreg/config.hpp"
#include "patchreg/forward_models.hpp"
#include "patchreg/image.hpp"
#include "patchreg/lbfgs.hpp"
#include "patchreg/likelihoods.hpp"
#include "patchreg/ordering.hpp"
#include "patchreg/regularizer.hpp"

namespace patchreg {

/// Raised when the optimization produces non-finite values.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Problem { Gaussian, Poisson, Deblur, SuperResolution };
const char* problem_name(Problem p);
/// "gauss", "poisson", "deblur", "sr".
Problem parse_problem(const std::string& s);

struct Preset {
  Problem problem = Problem::Gaussian;

  // Ordering and regularizer.
  std::size_t patch_side = 7;
  std::size_t window = 121;
  double delta = 1e6;
  double gamma_edge = 1.5;
  std::optional<double> g_thr = 3.5;
  double m_max = 20.0;
  double epsilon_r = 0.1;
  double epsilon_p = 1e-3;
  double epsilon_f = 1e-3;
  double c = 1.0;
  /// Absolute weight (table entries are already divided by n).
  double mu = 0.05 / 49.0;

  // Degradation.
  double sigma = 50.0;  // 0-255 scale; Gaussian problem
  int scenario = 1;     // Deblur
  bool sr_noisy = false;
  std::size_t sr_factor = 3;
  double peak = 4.0;     // Poisson
  double max_pix = 1.0;  // Poisson: intensity mapped to `peak` counts
  bool binning = false;
  std::size_t bin_factor = 3;

  std::uint64_t seed = 0;
  LbfgsConfig lbfgs;

  void validate() const;
  std::size_t patch_pixels() const { return patch_side * patch_side; }
  /// Upper bound of the unknown: 1 on the intensity scale, `peak` counts
  /// (times bin_factor^2 when binned) for Poisson.
  double x_max() const;
  RegularizerConfig regularizer_config() const;
};

Preset gaussian_preset(double sigma);
Preset deblur_preset(int scenario);
Preset sr_preset(bool noisy);
Preset poisson_preset(double peak);
/// "gauss-50", "deblur-3", "sr", "sr-noisy", "poisson-4", "poisson-0.5".
Preset preset_by_name(const std::string& name);

/// Overrides preset fields from a config map. Unknown keys raise
/// ConfigError. The "preset" and "problem" keys select the base preset and
/// are handled by the caller.
void apply_config(Preset& preset, const ConfigMap& cfg);
/// key = value lines for every field, parseable by apply_config.
std::string describe_preset(const Preset& p);

/// Forward operator for deblur and SR (null for the denoising problems).
std::optional<LinearOperator> forward_operator(const Preset& p, Dims x_dims);

struct Observation {
  GrayImage y;  // count scale for Poisson, intensity scale otherwise
  Dims x_dims;
};

/// Degrades a clean [0,1] image per the preset. For Poisson the clean
/// image maximum is used as max_pix.
Observation synthesize(const GrayImage& clean, const Preset& p, std::uint64_t seed);

struct RestoreReport {
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  StopReason stop_reason = StopReason::MaxIterations;
  double objective_init = 0.0;
  double objective_final = 0.0;
  ObjectiveBreakdown final_breakdown;
  double ordering_seconds = 0.0;
  double optimize_seconds = 0.0;
  std::vector<TraceEntry> trace;
};

struct RestoreResult {
  /// Restored image on the intensity scale at the clean image's dims
  /// (unbinned and rescaled for Poisson).
  GrayImage image;
  /// Minimizer on the optimization grid and scale.
  GrayImage x;
  Permutation perm;
  OrderingWeights weights;
  RestoreReport report;
};

/// Maps an intensity image to the grid and scale of the unknown (Poisson
/// count scale, binned grid when binning).
GrayImage to_unknown_scale(const GrayImage& intensity, const Preset& p);
/// Inverse of to_unknown_scale; `out_dims` crops the unbinned result.
GrayImage to_intensity_scale(const GrayImage& x, const Preset& p, Dims out_dims);

/// Orders the patches of `init`, freezes the weights, and minimizes the
/// objective from `init`. `y` is the raw observation (unbinned for
/// Poisson); `init` is on the grid/scale of the unknown.
RestoreResult restore(const GrayImage& y, const GrayImage& init, const Preset& p);

struct SelfRestoreRound {
  double mu = 0.0;
  std::optional<double> psnr;
  RestoreReport report;
};

struct SelfRestoreResult {
  GrayImage image;
  std::vector<SelfRestoreRound> rounds;
};

std::vector<double> default_self_schedule(std::size_t rounds);

/// Round 1 orders the patches of y itself; every later round reorders on
/// the previous output. Gaussian problem only. Round r uses seed p.seed + r.
SelfRestoreResult self_init_restore(const GrayImage& y, const Preset& p,
                                    const std::vector<double>& mu_schedule,
                                    const std::optional<GrayImage>& clean = std::nullopt);

}  // namespace patchreg
