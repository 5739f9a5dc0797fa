#pragma once

// Debug visualisation of the perception pipeline: raw frame, convolution
// output, palette-mapped quantization, and an overlay with region boundaries,
// centroids and the attended proto-objects.

#include <string>
#include <vector>

#include "protoattn/agent.hpp"
#include "protoattn/imgproc.hpp"

namespace protoattn {

/// Clamps to [0,1] and scales to 8 bits.
Rgb8Image to_rgb8(const Image& image);

/// Each pixel painted with its bin's center color, so at most 2^(3*bits)
/// distinct colors appear.
Rgb8Image palette_image(const QuantizedImage& image);

struct Marker {
  enum class Kind { Centroid, Selected };
  int x = 0;
  int y = 0;
  Kind kind = Kind::Centroid;
};

/// One marker per surviving proto-object; the attended ones are Selected.
std::vector<Marker> overlay_markers(const PerceptionTrace& trace);

/// Raw frame with region boundaries in gray, attended regions brightened with
/// a white outline, centroids in pink and attended centroids in black.
Rgb8Image render_overlay(const Rgb8Image& raw, const PerceptionTrace& trace);

/// Writes an 8-bit RGB PNG. Throws std::runtime_error on I/O failure.
void write_png(const std::string& path, const Rgb8Image& image);
/// Reads an 8-bit RGB PNG (used by tests and tools).
Rgb8Image read_png(const std::string& path);

}  // namespace protoattn
