#include "protoattn/trackdrive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "protoattn/errors.hpp"

namespace protoattn {

namespace {

constexpr std::array<std::uint8_t, 3> kGrassColor{102, 204, 102};
constexpr std::array<std::uint8_t, 3> kTrackColors[2] = {{102, 102, 102}, {107, 107, 107}};
constexpr std::array<std::uint8_t, 3> kCurbRedColor{255, 0, 0};
constexpr std::array<std::uint8_t, 3> kWhite{255, 255, 255};
constexpr std::array<std::uint8_t, 3> kCarColor{204, 0, 0};
constexpr std::array<std::uint8_t, 3> kHudColor{0, 0, 0};
constexpr std::array<std::uint8_t, 3> kSteerBarColor{0, 255, 0};

constexpr int kHudRows = 12;
constexpr int kViewRows = kFrameSize - kHudRows;
constexpr double kCarRow = 64.0;
constexpr double kCarCol = kFrameSize / 2.0;

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

// Distance from p to segment [a, b].
double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * ab));
}

Vec2 catmull_rom(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  auto axis = [&](double a, double b, double c, double d) {
    return 0.5 * (2 * b + (-a + c) * t + (2 * a - 5 * b + 4 * c - d) * t2 + (-a + 3 * b - 3 * c + d) * t3);
  };
  return {axis(p0.x, p1.x, p2.x, p3.x), axis(p0.y, p1.y, p2.y, p3.y)};
}

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
  return a;
}

}  // namespace

void TrackDrive::build_track(CounterRng& rng) {
  const int n = options_.control_points;
  std::vector<double> angle(n), radius(n);
  for (int i = 0; i < n; ++i) {
    angle[i] = 2 * std::numbers::pi * (i + rng.uniform(-0.3, 0.3)) / n;
    radius[i] = rng.uniform(options_.min_radius, options_.max_radius);
  }
  // Independent radii zig-zag into hairpins tighter than the car can turn;
  // circular smoothing keeps the bends drivable.
  for (int pass = 0; pass < options_.radius_smoothing; ++pass) {
    std::vector<double> r = radius;
    for (int i = 0; i < n; ++i) radius[i] = 0.25 * r[(i + n - 1) % n] + 0.5 * r[i] + 0.25 * r[(i + 1) % n];
  }
  std::vector<Vec2> ctrl(n);
  for (int i = 0; i < n; ++i) ctrl[i] = {radius[i] * std::cos(angle[i]), radius[i] * std::sin(angle[i])};

  constexpr int kSamplesPerSpan = 32;
  std::vector<Vec2> dense;
  dense.reserve(static_cast<std::size_t>(n) * kSamplesPerSpan + 1);
  for (int i = 0; i < n; ++i) {
    const Vec2 p0 = ctrl[(i + n - 1) % n], p1 = ctrl[i], p2 = ctrl[(i + 1) % n], p3 = ctrl[(i + 2) % n];
    for (int s = 0; s < kSamplesPerSpan; ++s) dense.push_back(catmull_rom(p0, p1, p2, p3, s / double(kSamplesPerSpan)));
  }
  dense.push_back(dense.front());

  std::vector<double> arc(dense.size(), 0.0);
  for (std::size_t i = 1; i < dense.size(); ++i) arc[i] = arc[i - 1] + norm(dense[i] - dense[i - 1]);
  const double length = arc.back();
  const int tiles = std::clamp(static_cast<int>(std::lround(length / options_.tile_length)), options_.min_tiles,
                               options_.max_tiles);

  auto& out = state_.tiles;
  out.clear();
  std::size_t j = 0;
  for (int t = 0; t < tiles; ++t) {
    const double target = length * t / tiles;
    while (j + 1 < arc.size() && arc[j + 1] < target) ++j;
    const double span = arc[j + 1] - arc[j];
    const double u = span > 0.0 ? (target - arc[j]) / span : 0.0;
    out.push_back(dense[j] + u * (dense[j + 1] - dense[j]));
  }
}

void TrackDrive::rasterize() {
  const auto& tiles = state_.tiles;
  const int n = static_cast<int>(tiles.size());
  const double reach = options_.half_width + options_.curb_width + 1.0;
  double min_x = std::numeric_limits<double>::max(), min_y = min_x;
  double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
  for (const auto& p : tiles) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  origin_ = {min_x - reach, min_y - reach};
  grid_w_ = static_cast<int>(std::ceil((max_x - min_x + 2 * reach) / cell_size_)) + 1;
  grid_h_ = static_cast<int>(std::ceil((max_y - min_y + 2 * reach) / cell_size_)) + 1;
  const std::size_t cells = static_cast<std::size_t>(grid_w_) * grid_h_;
  cell_tile_.assign(cells, -1);
  cell_surface_.assign(cells, kGrass);
  std::vector<float> best(cells, std::numeric_limits<float>::max());

  auto for_cells_near = [&](Vec2 a, Vec2 b, double pad, auto&& fn) {
    const int x0 = std::max(0, static_cast<int>((std::min(a.x, b.x) - pad - origin_.x) / cell_size_));
    const int x1 = std::min(grid_w_ - 1, static_cast<int>((std::max(a.x, b.x) + pad - origin_.x) / cell_size_) + 1);
    const int y0 = std::max(0, static_cast<int>((std::min(a.y, b.y) - pad - origin_.y) / cell_size_));
    const int y1 = std::min(grid_h_ - 1, static_cast<int>((std::max(a.y, b.y) + pad - origin_.y) / cell_size_) + 1);
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) {
        const Vec2 c{origin_.x + (cx + 0.5) * cell_size_, origin_.y + (cy + 0.5) * cell_size_};
        fn(static_cast<std::size_t>(cy) * grid_w_ + cx, c);
      }
  };

  const double hw = options_.half_width;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = tiles[i], b = tiles[(i + 1) % n];
    for_cells_near(a, b, hw, [&](std::size_t idx, Vec2 c) {
      const double d = segment_distance(c, a, b);
      if (d <= hw && d < best[idx]) {
        best[idx] = static_cast<float>(d);
        cell_tile_[idx] = static_cast<std::int16_t>(i);
        cell_surface_[idx] = kTrack;
      }
    });
  }

  // Alternating red/white curbs on the outside of sharp turns.
  for (int i = 0; i < n; ++i) {
    const Vec2 prev = tiles[(i + n - 1) % n], a = tiles[i], b = tiles[(i + 1) % n];
    const Vec2 d_in = a - prev, d_out = b - a;
    const double turn = wrap_angle(std::atan2(d_out.y, d_out.x) - std::atan2(d_in.y, d_in.x));
    if (std::abs(turn) < options_.curb_turn_threshold) continue;
    const auto colour = (i % 2 == 0) ? kCurbRed : kCurbWhite;
    for_cells_near(a, b, hw + options_.curb_width, [&](std::size_t idx, Vec2 c) {
      if (cell_surface_[idx] == kTrack) return;
      const double d = segment_distance(c, a, b);
      if (d <= hw || d > hw + options_.curb_width) return;
      const double side = cross(d_out, c - a);
      if ((turn > 0 && side < 0) || (turn < 0 && side > 0)) cell_surface_[idx] = colour;
    });
  }
}

std::size_t TrackDrive::cell_index(Vec2 p, bool& inside) const {
  const double fx = (p.x - origin_.x) / cell_size_;
  const double fy = (p.y - origin_.y) / cell_size_;
  inside = fx >= 0 && fy >= 0 && fx < grid_w_ && fy < grid_h_;
  if (!inside) return 0;
  return static_cast<std::size_t>(static_cast<int>(fy)) * grid_w_ + static_cast<int>(fx);
}

int TrackDrive::tile_at(Vec2 p) const {
  bool inside = false;
  const auto idx = cell_index(p, inside);
  return inside ? cell_tile_[idx] : -1;
}

double TrackDrive::distance_to_centerline(Vec2 p) const {
  const auto& tiles = state_.tiles;
  const std::size_t n = tiles.size();
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, segment_distance(p, tiles[i], tiles[(i + 1) % n]));
  return best;
}

double TrackDrive::tile_bonus() const {
  return state_.tiles.empty() ? 0.0 : 1000.0 * state_.visited_count / static_cast<double>(state_.tiles.size());
}

Rgb8Image TrackDrive::reset(std::uint64_t seed) {
  CounterRng rng(seed ^ 0x7EAC4D21E0000000ULL);
  build_track(rng);
  rasterize();
  auto& s = state_;
  const int n = tile_count();
  s.visited.assign(n, false);
  s.visited_count = 0;
  const Vec2 dir = s.tiles[1] - s.tiles[0];
  s.heading = std::atan2(dir.y, dir.x);
  s.pos = s.tiles[0] + 0.5 * (options_.tile_length / norm(dir)) * dir;
  s.speed = 0.0;
  s.last_steer = 0.0;
  s.step = 0;
  s.done = false;
  return render();
}

EnvStep TrackDrive::step(const Action& action) {
  auto& s = state_;
  if (s.done) throw ContractViolation("TrackDrive: step after episode end; call reset()");
  const auto* a = std::get_if<ContinuousAction>(&action);
  if (a == nullptr) throw ContractViolation("TrackDrive: expects a continuous action");

  const double steer = std::clamp(a->steer, -1.0, 1.0);
  const double gas = std::clamp(a->gas, 0.0, 1.0);
  const double brake = std::clamp(a->brake, 0.0, 1.0);
  const auto& o = options_;

  const double authority = std::min(1.0, s.speed / o.full_turn_speed);
  s.heading = wrap_angle(s.heading - steer * o.turn_rate * authority);
  s.speed = std::max(0.0, s.speed + gas * o.accel - brake * o.brake_decel - o.drag * s.speed);
  s.pos = s.pos + s.speed * Vec2{std::cos(s.heading), std::sin(s.heading)};
  s.last_steer = steer;
  ++s.step;

  EnvStep out;
  out.reward = -0.1;
  const int tile = tile_at(s.pos);
  if (tile >= 0 && !s.visited[tile]) {
    s.visited[tile] = true;
    ++s.visited_count;
    out.reward += 1000.0 / tile_count();
  }
  if (distance_to_centerline(s.pos) > o.half_width + o.far_margin) {
    out.reward -= 100.0;
    out.info.off_track = true;
    s.done = true;
  }
  if (s.visited_count == tile_count() || s.step >= o.step_limit) s.done = true;

  out.done = s.done;
  out.info.step = s.step;
  out.info.tiles_visited = s.visited_count;
  out.info.tiles_total = tile_count();
  out.frame = render();
  return out;
}

Rgb8Image TrackDrive::render() const {
  Rgb8Image img(kFrameSize, kFrameSize);
  const auto& s = state_;
  const Vec2 fwd{std::cos(s.heading), std::sin(s.heading)};
  const Vec2 right{std::sin(s.heading), -std::cos(s.heading)};
  const double zoom = options_.zoom;

  for (int py = 0; py < kViewRows; ++py) {
    const double f = (kCarRow - (py + 0.5)) / zoom;
    const Vec2 row_base = s.pos + f * fwd;
    for (int px = 0; px < kFrameSize; ++px) {
      const double l = (px + 0.5 - kCarCol) / zoom;
      bool inside = false;
      const auto idx = cell_index(row_base + l * right, inside);
      std::array<std::uint8_t, 3> c = kGrassColor;
      if (inside) {
        switch (cell_surface_[idx]) {
          case kTrack: c = kTrackColors[cell_tile_[idx] % 2]; break;
          case kCurbRed: c = kCurbRedColor; break;
          case kCurbWhite: c = kWhite; break;
          default: break;
        }
      }
      img.set(py, px, c);
    }
  }

  for (int py = 60; py < 68; ++py)
    for (int px = 46; px < 50; ++px) img.set(py, px, kCarColor);

  for (int py = kViewRows; py < kFrameSize; ++py)
    for (int px = 0; px < kFrameSize; ++px) img.set(py, px, kHudColor);
  const int speed_len = std::clamp(static_cast<int>(std::lround(s.speed / 1.5 * 30.0)), 0, 30);
  const int steer_len = static_cast<int>(std::lround(s.last_steer * 16.0));
  for (int py = kViewRows + 3; py < kViewRows + 9; ++py) {
    for (int px = 4; px < 4 + speed_len; ++px) img.set(py, px, kWhite);
    for (int px = std::min(64, 64 + steer_len); px < std::max(64, 64 + steer_len); ++px) img.set(py, px, kSteerBarColor);
  }
  return img;
}

}  // namespace protoattn
