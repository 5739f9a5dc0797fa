#include "protoattn/render.hpp"

#include <algorithm>
#include <cmath>

namespace protoattn {

namespace {

constexpr std::array<std::uint8_t, 3> kBoundary{160, 160, 160};
constexpr std::array<std::uint8_t, 3> kSelectedOutline{255, 255, 255};
constexpr std::array<std::uint8_t, 3> kPink{255, 105, 180};
constexpr std::array<std::uint8_t, 3> kBlack{0, 0, 0};

void draw_cross(Rgb8Image& img, int x, int y, std::array<std::uint8_t, 3> colour) {
  for (int d = -1; d <= 1; ++d) {
    if (x + d >= 0 && x + d < img.width) img.set(y, x + d, colour);
    if (y + d >= 0 && y + d < img.height) img.set(y + d, x, colour);
  }
}

}  // namespace

Rgb8Image to_rgb8(const Image& image) {
  Rgb8Image out(image.height, image.width);
  for (std::size_t i = 0; i < image.data.size(); ++i)
    out.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.data[i], 0.0, 1.0) * 255.0));
  return out;
}

Rgb8Image palette_image(const QuantizedImage& image) {
  Rgb8Image out(image.height, image.width);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const auto c = bin_center(static_cast<int>(image.at(y, x)), image.bits);
      out.set(y, x,
              {static_cast<std::uint8_t>(std::lround(c[0] * 255.0)), static_cast<std::uint8_t>(std::lround(c[1] * 255.0)),
               static_cast<std::uint8_t>(std::lround(c[2] * 255.0))});
    }
  return out;
}

std::vector<Marker> overlay_markers(const PerceptionTrace& trace) {
  std::vector<Marker> out;
  std::vector<bool> chosen(trace.objects.size(), false);
  for (int s : trace.selected) chosen[static_cast<std::size_t>(s)] = true;
  for (std::size_t i = 0; i < trace.objects.size(); ++i) {
    const auto& r = trace.objects[i].raw;
    out.push_back({static_cast<int>(std::lround(r.centroid_x())), static_cast<int>(std::lround(r.centroid_y())),
                   chosen[i] ? Marker::Kind::Selected : Marker::Kind::Centroid});
  }
  return out;
}

Rgb8Image render_overlay(const Rgb8Image& raw, const PerceptionTrace& trace) {
  Rgb8Image img = raw;
  const auto& lab = trace.labeling;
  std::vector<bool> selected_label(lab.regions.size(), false);
  for (int s : trace.selected) selected_label[static_cast<std::size_t>(trace.objects[s].raw.label)] = true;

  auto label_at = [&](int y, int x) { return lab.labels[static_cast<std::size_t>(y) * lab.width + x]; };
  for (int y = 0; y < lab.height; ++y) {
    for (int x = 0; x < lab.width; ++x) {
      const int l = label_at(y, x);
      const bool edge = (x + 1 < lab.width && label_at(y, x + 1) != l) || (y + 1 < lab.height && label_at(y + 1, x) != l) ||
                        (x > 0 && label_at(y, x - 1) != l) || (y > 0 && label_at(y - 1, x) != l);
      if (selected_label[static_cast<std::size_t>(l)]) {
        if (edge) {
          img.set(y, x, kSelectedOutline);
        } else {
          auto c = img.get(y, x);
          for (auto& v : c) v = static_cast<std::uint8_t>((v + 255) / 2);
          img.set(y, x, c);
        }
      } else if (edge) {
        img.set(y, x, kBoundary);
      }
    }
  }
  const auto markers = overlay_markers(trace);
  for (const auto& m : markers)
    if (m.kind == Marker::Kind::Centroid) draw_cross(img, m.x, m.y, kPink);
  for (const auto& m : markers)
    if (m.kind == Marker::Kind::Selected) draw_cross(img, m.x, m.y, kBlack);
  return img;
}

}  // namespace protoattn
