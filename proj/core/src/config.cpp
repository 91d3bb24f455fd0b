#include "symphony/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "symphony/envs.hpp"
#include "symphony/io.hpp"

namespace symphony {

Variant variant_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "s3") return Variant::kS3;
  if (lower == "se") return Variant::kSE;
  if (lower == "s2") return Variant::kS2;
  if (lower == "ed") return Variant::kED;
  if (lower == "s2t" || lower == "s2~" || lower == "s2tilde") {
    return Variant::kS2Tilde;
  }
  throw std::invalid_argument("unknown variant: " + s);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kS3: return "s3";
    case Variant::kSE: return "se";
    case Variant::kS2: return "s2";
    case Variant::kED: return "ed";
    case Variant::kS2Tilde: return "s2t";
  }
  return "?";
}

VariantConfig VariantConfig::preset(Variant v) {
  VariantConfig c;
  c.variant = v;
  constexpr double kE = 2.71828182845904523536;
  constexpr double kPi = 3.14159265358979323846;
  switch (v) {
    case Variant::kS3:
      break;
    case Variant::kSE:
      c.noise_scale = 1.0 / kPi;
      c.noise_clip = kPi;
      break;
    case Variant::kS2:
      c.n_exp = 20480;
      c.repeats = 25;
      c.lr = 0.5e-4;
      c.grad_dropout_p = 0.5;
      break;
    case Variant::kED:
      c.n_exp = 7680;
      c.repeats = 50;
      c.h_dim = 384;
      c.n_out = 96;
      c.buffer_precision = Precision::kHalf;
      break;
    case Variant::kS2Tilde:
      c.n_exp = 20480;
      c.repeats = 25;
      c.lr = 0.5e-4;
      c.grad_dropout_p = 0.8;
      c.dimpled_schedules = true;
      break;
  }
  return c;
}

void VariantConfig::validate(std::vector<std::string>* warnings) const {
  if (n_exp <= 0 || repeats <= 0) {
    throw std::invalid_argument("n_exp and repeats must be positive");
  }
  if (h_dim <= 0 || n_out <= 0) {
    throw std::invalid_argument("h_dim and n_out must be positive");
  }
  if (batch() != 3 * n_out) {
    throw std::invalid_argument("batch size must equal 3*n_out");
  }
  if (batch() > n_rb()) {
    throw std::invalid_argument("batch size exceeds replay capacity");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (grad_dropout_p < 0.0 || grad_dropout_p > 1.0) {
    throw std::invalid_argument("grad_dropout_p must be in [0, 1]");
  }
  if (!(noise_scale > 0.0) || !(noise_clip > 0.0)) {
    throw std::invalid_argument("noise scale/clip must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must be in (0, 1)");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("tau must be in (0, 1]");
  }
  if (updates_per_step <= 0) {
    throw std::invalid_argument("updates_per_step must be positive");
  }
  if (warnings && n_rb() < 384000) {
    std::ostringstream ss;
    ss << "replay capacity " << n_rb()
       << " is below the recommended minimum 384000 (7680*50)";
    warnings->push_back(ss.str());
  }
}

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  const std::string text = read_file(path);
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError(path + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    values[section.empty() ? key : section + "." + key] = value;
  }
  return values;
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected boolean, got '" + v + "'");
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad number '" + v + "'");
  return d;
}

std::int64_t parse_int(const std::string& v) {
  std::size_t pos = 0;
  const std::int64_t i = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer '" + v + "'");
  return i;
}

}  // namespace

void apply_config_values(RunConfig& config,
                         const std::map<std::string, std::string>& values) {
  // The variant selects a whole preset, so it must land before any override
  // regardless of where it appears in the file.
  if (auto it = values.find("run.variant"); it != values.end()) {
    config.algo = VariantConfig::preset(variant_from_string(it->second));
  }
  for (const auto& [key, value] : values) {
    auto& algo = config.algo;
    if (key == "run.variant") {
      continue;  // handled above
    } else if (key == "run.steps") {
      config.total_steps = parse_int(value);
    } else if (key == "run.seed") {
      config.seed = static_cast<std::uint64_t>(parse_int(value));
    } else if (key == "run.out_dir") {
      config.out_dir = value;
    } else if (key == "run.eval_every") {
      config.eval_every = static_cast<int>(parse_int(value));
    } else if (key == "run.eval_episodes") {
      config.eval_episodes = static_cast<int>(parse_int(value));
    } else if (key == "run.checkpoint_every") {
      config.checkpoint_every = static_cast<int>(parse_int(value));
    } else if (key == "env.name") {
      config.env_name = value;
    } else if (key == "env.c_ctrl") {
      config.c_ctrl = parse_double(value);
    } else if (key == "env.c_ctrl_preset") {
      config.c_ctrl = control_cost_preset(value);
    } else if (key == "replay.n_exp") {
      algo.n_exp = static_cast<int>(parse_int(value));
    } else if (key == "replay.repeats") {
      algo.repeats = static_cast<int>(parse_int(value));
    } else if (key == "replay.half_precision") {
      algo.buffer_precision =
          parse_bool(value) ? Precision::kHalf : Precision::kFull;
    } else if (key == "nets.h_dim") {
      algo.h_dim = static_cast<int>(parse_int(value));
    } else if (key == "nets.n_out") {
      algo.n_out = static_cast<int>(parse_int(value));
    } else if (key == "nets.grad_dropout_p") {
      algo.grad_dropout_p = parse_double(value);
    } else if (key == "nets.dimpled_schedules") {
      algo.dimpled_schedules = parse_bool(value);
    } else if (key == "optim.lr") {
      algo.lr = parse_double(value);
    } else if (key == "optim.sqrt_divisor") {
      algo.sqrt_divisor = parse_bool(value);
    } else if (key == "trainer.noise_scale") {
      algo.noise_scale = parse_double(value);
    } else if (key == "trainer.noise_clip") {
      algo.noise_clip = parse_double(value);
    } else if (key == "trainer.gamma") {
      algo.gamma = parse_double(value);
    } else if (key == "trainer.tau") {
      algo.tau = parse_double(value);
    } else if (key == "trainer.updates_per_step") {
      algo.updates_per_step = static_cast<int>(parse_int(value));
    } else if (key == "trainer.resample_per_update") {
      algo.resample_per_update = parse_bool(value);
    } else if (key == "trainer.continuous_learning") {
      algo.continuous_learning = parse_bool(value);
      if (algo.continuous_learning) algo.lr = 1e-5;
    } else if (key == "trainer.eval_sigma_one") {
      algo.eval_sigma_one = parse_bool(value);
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

}  // namespace symphony
