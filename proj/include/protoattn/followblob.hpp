#pragma once

#include "protoattn/envs.hpp"
#include "protoattn/rng.hpp"

namespace protoattn {

/// Toy tracking task: keep the agent's x position under a blob that random
/// walks across a plain room. Reward per step is 1 - |agent_x - blob_x| / W.
/// The view is centred on the agent and spans twice the room width, so the
/// blob is always visible and its horizontal offset is the tracking error.
class FollowBlob final : public Environment {
 public:
  struct Options {
    double room_width = 96.0;
    int episode_steps = 200;
    double agent_speed = 3.0;  // units per step at |steer| = 1
    double blob_max_speed = 1.5;
    double blob_accel_sd = 0.35;
    double blob_radius_px = 4.0;
  };

  struct State {
    double agent_x = 0.0;
    double blob_x = 0.0;
    double blob_y = 0.0;  // pixel row of the blob centre
    double blob_vx = 0.0;
    double blob_vy = 0.0;
    int step = 0;
    bool done = true;
  };

  FollowBlob() = default;
  explicit FollowBlob(Options options) : options_(options) {}

  EnvId id() const override { return EnvId::FollowBlob; }
  bool discrete_actions() const override { return false; }
  int step_limit() const override { return options_.episode_steps; }

  Rgb8Image reset(std::uint64_t seed) override;
  EnvStep step(const Action& action) override;
  Rgb8Image render() const override;
  bool done() const override { return state_.done; }

  const State& state() const { return state_; }
  State& mutable_state() { return state_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  State state_;
  CounterRng rng_;
};

}  // namespace protoattn
