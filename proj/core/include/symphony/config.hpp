#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "symphony/replay.hpp"

namespace symphony {

enum class Variant : std::uint32_t {
  kS3 = 0,      // default configuration
  kSE = 1,      // sample-efficient: 1/pi noise
  kS2 = 2,      // sample-proximity and safety: gradient dropout 50%
  kED = 3,      // embedded devices: smaller nets, half-precision buffer
  kS2Tilde = 4  // S2 with dimpled schedules and raised gradient dropout
};

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

/// Per-variant algorithm constants plus the shared fixed hyper-parameters.
/// Overrides are allowed ("one can unlink the correspondences completely")
/// but validate() keeps the structural invariants and warns on a replay
/// buffer smaller than the recommended minimum.
struct VariantConfig {
  Variant variant = Variant::kS3;

  double noise_scale = 1.0 / 2.71828182845904523536;  // 1/e
  double noise_clip = 2.71828182845904523536;         // e
  int n_exp = 10240;
  int repeats = 50;
  int h_dim = 512;
  int n_out = 128;  // per critic; batch = concatenated width = 3*n_out
  double lr = 1e-4;
  double grad_dropout_p = 0.0;
  bool dimpled_schedules = false;
  Precision buffer_precision = Precision::kFull;

  double gamma = 0.99;
  double tau = 0.005;
  int updates_per_step = 3;  // update-to-data ratio G
  double weight_decay = 0.01;

  bool resample_per_update = true;  // fresh batch per each of the G updates
  bool sqrt_divisor = false;        // optimizer comparison flag
  bool continuous_learning = false; // done-epsilon eviction, lr 1e-5
  bool eval_sigma_one = false;      // evaluate with sigma forced to 1
  double fixed_beta = -1.0;         // >= 0 switches to the fixed-beta hook

  int n_rb() const { return n_exp * repeats; }
  int batch() const { return 3 * n_out; }

  static VariantConfig preset(Variant v);

  /// Throws std::invalid_argument on structural violations; appends
  /// non-fatal warnings (e.g. small replay buffer) to `warnings`.
  void validate(std::vector<std::string>* warnings = nullptr) const;
};

struct RunConfig {
  VariantConfig algo;
  std::string env_name = "pendulum";
  double c_ctrl = -1.0;  // < 0 keeps the environment default
  std::uint64_t seed = 0;
  std::int64_t total_steps = 0;  // environment steps, exploration included
  std::string out_dir = ".";
  int eval_every = 0;  // periodic evaluation cadence in env steps; 0 = off
  int eval_episodes = 25;
  int checkpoint_every = 10000;
  std::string resume_from;  // checkpoint path; empty = fresh run
};

/// Parses the flat `key = value` config format ('#' comments, [section]
/// headers). Returns "section.key" -> value; keys before any section header
/// are returned bare. Throws FormatError on malformed lines.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Applies file values onto a RunConfig. Unknown keys throw
/// std::invalid_argument; the CLI applies its flags afterwards so that flags
/// override file values which override variant defaults.
void apply_config_values(RunConfig& config,
                         const std::map<std::string, std::string>& values);

}  // namespace symphony
