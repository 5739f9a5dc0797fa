#pragma once

#include <vector>

#include "protoattn/envs.hpp"
#include "protoattn/rng.hpp"

namespace protoattn {

/// Survival task: monsters appear along the far wall and fire projectiles at
/// the agent's position at the moment of firing. The agent moves left, right
/// or stays on the near wall and earns +1 per tic survived. Rendered as a flat
/// projection centred on the agent (the agent itself is not drawn).
class DodgeRoom final : public Environment {
 public:
  struct Options {
    double room_width = 96.0;
    double room_depth = 80.0;
    double agent_half_width = 3.0;
    double agent_speed = 2.0;
    double spawn_prob = 0.02;  // per tic
    int max_monsters = 5;
    int fire_interval = 40;
    double projectile_speed = 1.2;
    double projectile_radius = 2.0;
    int step_limit = 2100;
  };

  struct Monster {
    double x = 0.0;
    int cooldown = 0;
  };

  struct Projectile {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;  // negative: toward the near wall at y = 0
  };

  struct State {
    double agent_x = 0.0;
    std::vector<Monster> monsters;
    std::vector<Projectile> projectiles;
    int tic = 0;
    bool done = true;
  };

  DodgeRoom() = default;
  explicit DodgeRoom(Options options) : options_(options) {}

  EnvId id() const override { return EnvId::DodgeRoom; }
  bool discrete_actions() const override { return true; }
  int step_limit() const override { return options_.step_limit; }

  Rgb8Image reset(std::uint64_t seed) override;
  EnvStep step(const Action& action) override;
  Rgb8Image render() const override;
  bool done() const override { return state_.done; }

  /// Fires a projectile from the far wall at from_x toward the agent's
  /// current position.
  void launch_projectile(double from_x);

  const State& state() const { return state_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  State state_;
  CounterRng rng_;
};

}  // namespace protoattn
