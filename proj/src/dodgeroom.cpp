#include "protoattn/dodgeroom.hpp"

#include <algorithm>
#include <cmath>

#include "protoattn/errors.hpp"

namespace protoattn {

namespace {

constexpr std::array<std::uint8_t, 3> kFloor[2] = {{70, 60, 50}, {90, 78, 60}};
constexpr std::array<std::uint8_t, 3> kBackWall[2] = {{110, 100, 90}, {100, 88, 76}};
constexpr std::array<std::uint8_t, 3> kSideWall[2] = {{60, 60, 70}, {80, 80, 92}};
constexpr std::array<std::uint8_t, 3> kMonster{200, 40, 40};
constexpr std::array<std::uint8_t, 3> kProjectile{255, 220, 60};

constexpr int kWallRows = 16;
constexpr int kFloorRows = kFrameSize - kWallRows;

}  // namespace

Rgb8Image DodgeRoom::reset(std::uint64_t seed) {
  rng_ = CounterRng(seed ^ 0xD0D6E00000000000ULL);
  state_ = State{};
  state_.agent_x = options_.room_width / 2.0;
  state_.done = false;
  return render();
}

void DodgeRoom::launch_projectile(double from_x) {
  const double dx = state_.agent_x - from_x;
  const double dy = -options_.room_depth;
  const double dist = std::hypot(dx, dy);
  const double s = options_.projectile_speed / dist;
  state_.projectiles.push_back({from_x, options_.room_depth, dx * s, dy * s});
}

EnvStep DodgeRoom::step(const Action& action) {
  auto& s = state_;
  if (s.done) throw ContractViolation("DodgeRoom: step after episode end; call reset()");
  const auto* a = std::get_if<DodgeAction>(&action);
  if (a == nullptr) throw ContractViolation("DodgeRoom: expects a discrete action");
  const auto& o = options_;

  const double move = *a == DodgeAction::Left ? -1.0 : *a == DodgeAction::Right ? 1.0 : 0.0;
  s.agent_x = std::clamp(s.agent_x + move * o.agent_speed, o.agent_half_width, o.room_width - o.agent_half_width);

  EnvStep out;
  // Projectiles fly in straight lines; arrival at the near wall either hits
  // the agent or despawns.
  std::vector<Projectile> alive;
  alive.reserve(s.projectiles.size());
  for (auto p : s.projectiles) {
    p.x += p.vx;
    p.y += p.vy;
    if (p.y <= 0.0) {
      if (std::abs(p.x - s.agent_x) <= o.agent_half_width + o.projectile_radius) out.info.hit = true;
      continue;
    }
    alive.push_back(p);
  }
  s.projectiles = std::move(alive);

  if (static_cast<int>(s.monsters.size()) < o.max_monsters && rng_.bernoulli(o.spawn_prob)) {
    const double x = rng_.uniform(5.0, o.room_width - 5.0);
    const int first_shot = 10 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(std::max(1, o.fire_interval - 9))));
    s.monsters.push_back({x, first_shot});
  }
  for (auto& m : s.monsters) {
    if (--m.cooldown <= 0) {
      launch_projectile(m.x);
      m.cooldown = o.fire_interval;
    }
  }

  ++s.tic;
  out.reward = 1.0;
  s.done = out.info.hit || s.tic >= o.step_limit;
  out.done = s.done;
  out.info.step = s.tic;
  out.info.projectiles_alive = static_cast<int>(s.projectiles.size());
  out.info.monsters_alive = static_cast<int>(s.monsters.size());
  out.frame = render();
  return out;
}

Rgb8Image DodgeRoom::render() const {
  Rgb8Image img(kFrameSize, kFrameSize);
  const auto& o = options_;
  const auto& s = state_;
  const double units_per_px = 2.0 * o.room_width / kFrameSize;
  const double half = kFrameSize / 2.0;
  auto column_of = [&](double world_x) { return half + (world_x - s.agent_x) / units_per_px; };
  auto row_of = [&](double world_y) { return kWallRows + (1.0 - world_y / o.room_depth) * kFloorRows; };

  for (int py = 0; py < kFrameSize; ++py) {
    for (int px = 0; px < kFrameSize; ++px) {
      const double wx = s.agent_x + (px + 0.5 - half) * units_per_px;
      const int checker = ((static_cast<int>(std::floor(wx / 8.0)) + py / 4) & 1);
      if (wx < 0.0 || wx > o.room_width)
        img.set(py, px, kSideWall[checker]);
      else if (py < kWallRows)
        img.set(py, px, kBackWall[(px / 3 + py / 3) & 1]);
      else
        img.set(py, px, kFloor[checker]);
    }
  }

  for (const auto& m : s.monsters) {
    const int c = static_cast<int>(std::lround(column_of(m.x)));
    for (int py = 3; py < kWallRows; ++py)
      for (int px = c - 2; px < c + 2; ++px)
        if (px >= 0 && px < kFrameSize) img.set(py, px, kMonster);
  }

  for (const auto& p : s.projectiles) {
    const double cx = column_of(p.x);
    const double cy = row_of(p.y);
    const double r = 1.5 + 2.0 * (1.0 - p.y / o.room_depth);  // nearer looks bigger
    for (int py = std::max(0, int(cy - r) - 1); py <= std::min(kFrameSize - 1, int(cy + r) + 1); ++py)
      for (int px = std::max(0, int(cx - r) - 1); px <= std::min(kFrameSize - 1, int(cx + r) + 1); ++px) {
        const double dx = px + 0.5 - cx, dy = py + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) img.set(py, px, kProjectile);
      }
  }
  return img;
}

}  // namespace protoattn
