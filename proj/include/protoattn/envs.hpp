#pragma once

// Deterministic, seeded, desk-scale visual environments. Each instance owns
// its own generator and is confined to one rollout.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "protoattn/controller.hpp"
#include "protoattn/imgproc.hpp"

namespace protoattn {

enum class EnvId { FollowBlob, TrackDrive, DodgeRoom };

std::string_view env_name(EnvId id);
/// Throws ConfigError for unknown names.
EnvId parse_env_id(std::string_view name);

enum class DodgeAction : int { Left = 0, Still = 1, Right = 2 };

using Action = std::variant<ContinuousAction, DodgeAction>;

struct StepInfo {
  int step = 0;
  int tiles_visited = 0;
  int tiles_total = 0;
  int projectiles_alive = 0;
  int monsters_alive = 0;
  bool off_track = false;
  bool hit = false;
};

struct EnvStep {
  Rgb8Image frame;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvId id() const = 0;
  /// Discrete environments take a DodgeAction, the others a ContinuousAction.
  virtual bool discrete_actions() const = 0;
  virtual int step_limit() const = 0;

  /// Starts a fresh episode; the returned frame is the first observation.
  virtual Rgb8Image reset(std::uint64_t seed) = 0;
  /// Throws ContractViolation after the episode has ended or before reset.
  virtual EnvStep step(const Action& action) = 0;
  virtual Rgb8Image render() const = 0;

  virtual bool done() const = 0;
};

inline constexpr int kFrameSize = 96;

std::unique_ptr<Environment> make_env(EnvId id);

}  // namespace protoattn
