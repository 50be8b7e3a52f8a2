#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boxctl/evolution.hpp"
#include "boxctl/path.hpp"
#include "manifest.hpp"

namespace boxctl::cli {

/// "2,1" -> (2,1).
Mode parse_mode(const std::string& text);
/// "2,1;1,2" (also space separated) -> modes.
std::vector<Mode> parse_mode_list(const std::string& text);
std::string mode_label(Mode k);

/// Path from a JSON object:
///   {"type": "stationary", "a", "b", "t0", "t1"}
///   {"type": "linear" | "smoothstep", "a0", "a1", "b0", "b1", "t0", "t1"}
///   {"type": "samples", "horizontal": <shape CSV or length>,
///    "vertical": <shape CSV or length>, "t1": optional end time}
/// Relative CSV paths are resolved against `base_dir`. Sampled sides start at
/// t = 0 and are held after their last sample.
DeformationPath path_from_json(const json& spec, const std::filesystem::path& base_dir);

struct EvolveConfig {
  json echo;  // the config object as read
  DeformationPath path;
  int n1 = 24;
  int n2 = 24;
  double dt = 0.0025;
  std::vector<std::pair<Mode, std::complex<double>>> initial;
  bool initial_physical = true;
  double breaker_strength = 0.0;
  std::uint64_t seed = 1;
  std::string envelope = "bump";  // bump | constant
  std::vector<Mode> record;
  int observe_every = 0;           // 0: about 200 rows
  double tail_threshold = 1e-6;
  std::optional<std::string> output;
};

/// Reads a run config, or the "config" member of a manifest written by
/// `boxctl evolve`.
EvolveConfig load_evolve_config(const std::filesystem::path& file);
EvolveConfig evolve_config_from_json(const json& config, const std::filesystem::path& base_dir);

}  // namespace boxctl::cli
