#pragma once

// Run configuration and its `key = value` text format.
//
//   # comment
//   env = trackdrive
//   population = 32
//
// Unknown keys and malformed values are rejected with the offending line.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "protoattn/envs.hpp"
#include "protoattn/genome.hpp"

namespace protoattn {

struct RunConfig {
  ModelConfig model;
  EnvId env = EnvId::TrackDrive;
  int population = 128;
  int generations = 1000;
  int seeds_per_gen = 8;
  int test_every = 100;
  int test_seeds = 400;
  double sigma0 = 0.1;
  int workers = 0;  // 0: PROTOATTN_WORKERS or hardware concurrency
  std::string out_dir = "runs/default";
  std::uint64_t master_seed = 1;
  int max_steps = 0;  // 0: the environment's own step limit
  bool record_wall_time = true;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Every accepted key, in canonical order.
const std::vector<std::string>& run_config_keys();

RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
/// Throws ConfigError naming the path if it cannot be read.
RunConfig load_run_config(const std::string& path);
/// Applies one "key=value" override.
void apply_override(RunConfig& config, std::string_view assignment);
/// Canonical text form; parse_run_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

}  // namespace protoattn
