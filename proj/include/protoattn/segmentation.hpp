#pragma once

// Proto-object extraction: color-connected component labeling of a quantized
// image, noise filtering, and the 11-feature region descriptor.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "protoattn/imgproc.hpp"

namespace protoattn {

enum class Connectivity { Four = 4, Eight = 8 };

struct RegionStats {
  std::int32_t label = -1;  // index in the originating Labeling
  std::uint32_t bin = 0;
  std::int64_t pixel_count = 0;
  std::int64_t sum_x = 0;
  std::int64_t sum_y = 0;
  int min_x = 0, max_x = 0, min_y = 0, max_y = 0;

  int bbox_width() const noexcept { return max_x - min_x + 1; }
  int bbox_height() const noexcept { return max_y - min_y + 1; }
  double centroid_x() const noexcept { return static_cast<double>(sum_x) / pixel_count; }
  double centroid_y() const noexcept { return static_cast<double>(sum_y) / pixel_count; }

  bool operator==(const RegionStats&) const = default;
};

/// Feature slots of a proto-object descriptor. Attention weights are laid out
/// against this order, so it must not change.
enum Feature : int {
  kRed = 0,
  kGreen,
  kBlue,
  kComX,
  kComY,
  kArea,
  kBboxWidth,
  kBboxHeight,
  kBboxArea,
  kAspectRatio,
  kExtent,
  kFeatureCount
};

inline constexpr int kFeatureDim = kFeatureCount;
using FeatureVector = std::array<double, kFeatureDim>;

struct ProtoObject {
  FeatureVector features{};
  RegionStats raw;
};

struct Labeling {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> labels;  // row-major, dense in [0, regions.size())
  std::vector<RegionStats> regions;  // indexed by label
};

/// Two-pass union-find labeling. Regions are numbered in raster order of
/// their first pixel.
Labeling label_components(const QuantizedImage& image, Connectivity connectivity = Connectivity::Four);

/// Drops regions whose bounding box is one pixel wide or one pixel tall.
std::vector<RegionStats> filter_noise(std::span<const RegionStats> regions);

/// log(w/h) / log(max(img_w, img_h)), clamped to [-1, 1]. Zero for square
/// boxes, +1 for a full-width one-pixel-tall sliver.
double norm_aspect_ratio(int bbox_w, int bbox_h, int img_w, int img_h);

/// Normalized descriptors, one per region, all features in [-1, 1].
std::vector<ProtoObject> extract_features(std::span<const RegionStats> regions, int img_w, int img_h,
                                          int bits);

/// label_components -> filter_noise -> extract_features.
std::vector<ProtoObject> segment(const QuantizedImage& image,
                                 Connectivity connectivity = Connectivity::Four);

}  // namespace protoattn
