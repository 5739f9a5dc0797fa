#include "protoattn/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "protoattn/errors.hpp"

namespace protoattn {

Frame to_frame(const Rgb8Image& raster) {
  Frame frame(raster.height, raster.width);
  for (std::size_t i = 0; i < raster.data.size(); ++i) frame.data[i] = raster.data[i] / 255.0;
  return frame;
}

Image conv1x1_residual(const Image& frame, const ConvParams& params) {
  for (const auto& row : params.weights)
    for (double w : row)
      if (!std::isfinite(w)) throw MalformedInput("conv1x1_residual: non-finite weight");
  for (double b : params.biases)
    if (!std::isfinite(b)) throw MalformedInput("conv1x1_residual: non-finite bias");
  if (frame.data.size() != frame.pixel_count() * 3)
    throw MalformedInput("conv1x1_residual: frame buffer does not match its dimensions");

  // Residual folded into the diagonal: out = (W + I) x + b.
  const auto& w = params.weights;
  const double m00 = w[0][0] + 1.0, m01 = w[0][1], m02 = w[0][2];
  const double m10 = w[1][0], m11 = w[1][1] + 1.0, m12 = w[1][2];
  const double m20 = w[2][0], m21 = w[2][1], m22 = w[2][2] + 1.0;
  const double b0 = params.biases[0], b1 = params.biases[1], b2 = params.biases[2];

  Image out;
  out.height = frame.height;
  out.width = frame.width;
  out.data.resize(frame.data.size());
  const std::size_t n = frame.pixel_count();
  const double* in = frame.data.data();
  double* o = out.data.data();
  bool finite = true;
  for (std::size_t p = 0; p < n; ++p, in += 3, o += 3) {
    const double r = in[0], g = in[1], b = in[2];
    // |v| <= max is false for NaN and infinities.
    finite &= (std::abs(r) <= std::numeric_limits<double>::max()) & (std::abs(g) <= std::numeric_limits<double>::max()) &
              (std::abs(b) <= std::numeric_limits<double>::max());
    o[0] = m00 * r + m01 * g + m02 * b + b0;
    o[1] = m10 * r + m11 * g + m12 * b + b1;
    o[2] = m20 * r + m21 * g + m22 * b + b2;
  }
  if (!finite) throw MalformedInput("conv1x1_residual: non-finite pixel");
  return out;
}

namespace {

// Clamp to [0,1], then floor(c * levels) with c = 1 absorbed by the top
// level. NaN lands in level 0.
inline int level_of(double v, int levels) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return levels - 1;
  return std::min(static_cast<int>(v * levels), levels - 1);
}

}  // namespace

QuantizedImage quantize(const Image& image, int bits) {
  if (bits < 1 || bits > 8) throw ConfigError("quantize: bits must be in [1, 8], got " + std::to_string(bits));
  const int levels = 1 << bits;
  QuantizedImage q;
  q.height = image.height;
  q.width = image.width;
  q.bits = bits;
  q.bins.resize(image.pixel_count());
  for (std::size_t p = 0; p < q.bins.size(); ++p) {
    const double* px = &image.data[p * 3];
    const int r = level_of(px[0], levels);
    const int g = level_of(px[1], levels);
    const int b = level_of(px[2], levels);
    q.bins[p] = static_cast<std::uint32_t>((r << (2 * bits)) | (g << bits) | b);
  }
  return q;
}

QuantizedImage preprocess(const Frame& frame, const ConvParams& params, int bits) {
  return quantize(conv1x1_residual(frame, params), bits);
}

std::array<int, 3> bin_levels(int bin, int bits) {
  const int mask = (1 << bits) - 1;
  return {(bin >> (2 * bits)) & mask, (bin >> bits) & mask, bin & mask};
}

std::array<double, 3> bin_center(int bin, int bits) {
  const auto lv = bin_levels(bin, bits);
  const double levels = static_cast<double>(1 << bits);
  return {(lv[0] + 0.5) / levels, (lv[1] + 0.5) / levels, (lv[2] + 0.5) / levels};
}

}  // namespace protoattn
