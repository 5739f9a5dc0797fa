#pragma once

#include <vector>

#include "protoattn/envs.hpp"
#include "protoattn/rng.hpp"

namespace protoattn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Top-down driving on a procedurally generated closed track. Rewards follow
/// the racing benchmark it stands in for: -0.1 per frame, +1000/N for each of
/// the N tiles on first visit, -100 and termination when the car strays far
/// from the track. The view is car-centric (car fixed, heading up) with a
/// black HUD strip at the bottom.
class TrackDrive final : public Environment {
 public:
  struct Options {
    int control_points = 12;
    double min_radius = 60.0;
    double max_radius = 110.0;
    int radius_smoothing = 2;  // passes of a [1/4, 1/2, 1/4] filter over control radii
    double tile_length = 8.0;
    int min_tiles = 40;
    int max_tiles = 120;
    double half_width = 6.0;
    double curb_width = 1.5;
    double curb_turn_threshold = 0.08;  // radians of heading change per tile
    double far_margin = 12.0;           // distance beyond the edge that ends the episode
    int step_limit = 1000;

    double accel = 0.03;
    double brake_decel = 0.06;
    double drag = 0.02;  // per-step fraction of speed
    double turn_rate = 0.07;
    double full_turn_speed = 0.5;  // steering authority saturates at this speed

    double zoom = 1.6;  // pixels per world unit
  };

  struct State {
    std::vector<Vec2> tiles;  // centerline point at the start of each tile
    std::vector<bool> visited;
    int visited_count = 0;
    Vec2 pos;
    double heading = 0.0;  // radians, counter-clockwise from +x
    double speed = 0.0;
    double last_steer = 0.0;
    int step = 0;
    bool done = true;
  };

  TrackDrive() = default;
  explicit TrackDrive(Options options) : options_(options) {}

  EnvId id() const override { return EnvId::TrackDrive; }
  bool discrete_actions() const override { return false; }
  int step_limit() const override { return options_.step_limit; }

  Rgb8Image reset(std::uint64_t seed) override;
  EnvStep step(const Action& action) override;
  Rgb8Image render() const override;
  bool done() const override { return state_.done; }

  const State& state() const { return state_; }
  State& mutable_state() { return state_; }
  const Options& options() const { return options_; }

  int tile_count() const { return static_cast<int>(state_.tiles.size()); }
  /// Distance from p to the track centerline.
  double distance_to_centerline(Vec2 p) const;
  /// Index of the tile surface under p, or -1 (grass or curb).
  int tile_at(Vec2 p) const;
  /// 1000 * visited / N.
  double tile_bonus() const;

 private:
  enum Surface : std::uint8_t { kGrass = 0, kTrack = 1, kCurbRed = 2, kCurbWhite = 3 };

  void build_track(CounterRng& rng);
  void rasterize();
  std::size_t cell_index(Vec2 p, bool& inside) const;

  Options options_;
  State state_;

  // World raster of the track surface.
  double cell_size_ = 0.5;
  Vec2 origin_;
  int grid_w_ = 0;
  int grid_h_ = 0;
  std::vector<std::int16_t> cell_tile_;
  std::vector<std::uint8_t> cell_surface_;
};

}  // namespace protoattn
