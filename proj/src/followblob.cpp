#include "protoattn/followblob.hpp"

#include <algorithm>
#include <cmath>

#include "protoattn/errors.hpp"

namespace protoattn {

namespace {

constexpr std::array<std::uint8_t, 3> kBackground{20, 20, 60};
constexpr std::array<std::uint8_t, 3> kWall{50, 50, 50};
constexpr std::array<std::uint8_t, 3> kBlob{255, 200, 0};
constexpr double kBlobRowMin = 16.0;
constexpr double kBlobRowMax = 80.0;

// Reflects x into [lo, hi], flipping the velocity on contact.
void reflect(double& x, double& v, double lo, double hi) {
  if (x < lo) {
    x = 2 * lo - x;
    v = -v;
  } else if (x > hi) {
    x = 2 * hi - x;
    v = -v;
  }
  x = std::clamp(x, lo, hi);
}

}  // namespace

Rgb8Image FollowBlob::reset(std::uint64_t seed) {
  rng_ = CounterRng(seed ^ 0xF0110B10B0000000ULL);
  const double w = options_.room_width;
  const bool agent_left = rng_.bernoulli(0.5);
  State s;
  s.agent_x = agent_left ? rng_.uniform(0.05, 0.15) * w : rng_.uniform(0.85, 0.95) * w;
  s.blob_x = agent_left ? rng_.uniform(0.6, 0.95) * w : rng_.uniform(0.05, 0.4) * w;
  s.blob_y = rng_.uniform(kBlobRowMin + 10, kBlobRowMax - 10);
  s.blob_vx = rng_.uniform(-1.0, 1.0) * options_.blob_max_speed;
  s.blob_vy = rng_.uniform(-1.0, 1.0);
  s.step = 0;
  s.done = false;
  state_ = s;
  return render();
}

EnvStep FollowBlob::step(const Action& action) {
  if (state_.done) throw ContractViolation("FollowBlob: step after episode end; call reset()");
  const auto* a = std::get_if<ContinuousAction>(&action);
  if (a == nullptr) throw ContractViolation("FollowBlob: expects a continuous action");

  auto& s = state_;
  const double w = options_.room_width;
  s.agent_x = std::clamp(s.agent_x + std::clamp(a->steer, -1.0, 1.0) * options_.agent_speed, 0.0, w);

  EnvStep out;
  out.reward = 1.0 - std::abs(s.agent_x - s.blob_x) / w;

  const double vmax = options_.blob_max_speed;
  s.blob_vx = std::clamp(s.blob_vx + rng_.normal() * options_.blob_accel_sd, -vmax, vmax);
  s.blob_vy = std::clamp(s.blob_vy + rng_.normal() * options_.blob_accel_sd, -1.0, 1.0);
  s.blob_x += s.blob_vx;
  s.blob_y += s.blob_vy;
  reflect(s.blob_x, s.blob_vx, 0.0, w);
  reflect(s.blob_y, s.blob_vy, kBlobRowMin, kBlobRowMax);

  ++s.step;
  s.done = s.step >= options_.episode_steps;
  out.done = s.done;
  out.info.step = s.step;
  out.frame = render();
  return out;
}

Rgb8Image FollowBlob::render() const {
  Rgb8Image img(kFrameSize, kFrameSize);
  const double w = options_.room_width;
  const double units_per_px = 2.0 * w / kFrameSize;
  const double half = kFrameSize / 2.0;
  const double blob_col = half + (state_.blob_x - state_.agent_x) / units_per_px;
  const double r2 = options_.blob_radius_px * options_.blob_radius_px;
  for (int x = 0; x < kFrameSize; ++x) {
    const double world_x = state_.agent_x + (x + 0.5 - half) * units_per_px;
    const auto base = (world_x < 0.0 || world_x > w) ? kWall : kBackground;
    const double dx = x + 0.5 - blob_col;
    for (int y = 0; y < kFrameSize; ++y) {
      const double dy = y + 0.5 - state_.blob_y;
      img.set(y, x, dx * dx + dy * dy <= r2 ? kBlob : base);
    }
  }
  return img;
}

}  // namespace protoattn
