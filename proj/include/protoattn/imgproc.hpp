#pragma once

// Frame preprocessing: 1x1 convolution with a residual connection, followed
// by uniform per-channel quantization into color bins.

#include <array>
#include <cstdint>
#include <vector>

namespace protoattn {

/// H x W x 3 real image, interleaved (row-major, channel fastest).
/// Environment frames keep channels in [0,1]; convolution outputs are
/// unbounded.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height) * width; }
  double& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  bool operator==(const Image&) const = default;
};

using Frame = Image;

/// 8-bit RGB raster as produced by the environments.
struct Rgb8Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  Rgb8Image() = default;
  Rgb8Image(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, 0) {}

  void set(int y, int x, std::array<std::uint8_t, 3> rgb) {
    auto* p = &data[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = rgb[0];
    p[1] = rgb[1];
    p[2] = rgb[2];
  }
  std::array<std::uint8_t, 3> get(int y, int x) const {
    const auto* p = &data[(static_cast<std::size_t>(y) * width + x) * 3];
    return {p[0], p[1], p[2]};
  }

  bool operator==(const Rgb8Image&) const = default;
};

/// Divides every channel by 255.
Frame to_frame(const Rgb8Image& raster);

/// Three 1x1 filters over three input channels. weights[out][in].
struct ConvParams {
  static constexpr std::size_t kParamCount = 12;

  std::array<std::array<double, 3>, 3> weights{};
  std::array<double, 3> biases{};

  bool operator==(const ConvParams&) const = default;
};

struct QuantizedImage {
  int height = 0;
  int width = 0;
  int bits = 1;
  std::vector<std::uint32_t> bins;  // row-major, one bin index per pixel

  std::uint32_t at(int y, int x) const { return bins[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixel_count() const noexcept { return bins.size(); }
  int bin_count() const noexcept { return 1 << (3 * bits); }

  bool operator==(const QuantizedImage&) const = default;
};

/// output[p] = W * frame[p] + b + frame[p]. Throws MalformedInput on any
/// non-finite pixel or parameter.
Image conv1x1_residual(const Image& frame, const ConvParams& params);

/// Clamps each channel to [0,1] and bins it into 2^bits uniform levels
/// (half-open intervals, 1.0 falls in the top level). Bin index packs the
/// levels R-major: (r << 2*bits) | (g << bits) | b. bits must be in [1, 8].
QuantizedImage quantize(const Image& image, int bits);

/// quantize(conv1x1_residual(frame, params), bits).
QuantizedImage preprocess(const Frame& frame, const ConvParams& params, int bits);

/// Per-channel quantization levels of a bin index.
std::array<int, 3> bin_levels(int bin, int bits);

/// Center of each channel's interval for the given bin, in [0,1].
std::array<double, 3> bin_center(int bin, int bits);

}  // namespace protoattn
