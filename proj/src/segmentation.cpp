#include "protoattn/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace protoattn {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t reserve) {
    parent_.reserve(reserve);
    rank_.reserve(reserve);
  }

  std::int32_t make_set() {
    const auto id = static_cast<std::int32_t>(parent_.size());
    parent_.push_back(id);
    rank_.push_back(0);
    return id;
  }

  std::int32_t find(std::int32_t x) {
    std::int32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::int32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::int32_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace

Labeling label_components(const QuantizedImage& image, Connectivity connectivity) {
  const int h = image.height;
  const int w = image.width;
  Labeling out;
  out.height = h;
  out.width = w;
  out.labels.assign(image.pixel_count(), -1);
  if (image.pixel_count() == 0) return out;

  const bool eight = connectivity == Connectivity::Eight;
  DisjointSets sets(image.pixel_count() / 4 + 1);
  auto& lab = out.labels;

  // First pass: provisional labels from already-visited neighbours.
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t p = row + x;
      const auto v = image.bins[p];
      std::int32_t label = -1;
      auto join = [&](std::size_t q) {
        if (image.bins[q] != v) return;
        if (label < 0)
          label = lab[q];
        else if (lab[q] != label)
          sets.unite(label, lab[q]);
      };
      if (x > 0) join(p - 1);
      if (y > 0) {
        join(p - w);
        if (eight) {
          if (x > 0) join(p - w - 1);
          if (x + 1 < w) join(p - w + 1);
        }
      }
      lab[p] = label >= 0 ? label : sets.make_set();
    }
  }

  // Second pass: resolve to roots, renumber densely in raster order and
  // accumulate region statistics.
  std::vector<std::int32_t> dense(sets.size(), -1);
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t p = row + x;
      const std::int32_t root = sets.find(lab[p]);
      std::int32_t id = dense[root];
      if (id < 0) {
        id = dense[root] = static_cast<std::int32_t>(out.regions.size());
        RegionStats r;
        r.label = id;
        r.bin = image.bins[p];
        r.min_x = r.max_x = x;
        r.min_y = r.max_y = y;
        out.regions.push_back(r);
      }
      lab[p] = id;
      auto& r = out.regions[id];
      ++r.pixel_count;
      r.sum_x += x;
      r.sum_y += y;
      r.min_x = std::min(r.min_x, x);
      r.max_x = std::max(r.max_x, x);
      r.max_y = y;
    }
  }
  return out;
}

std::vector<RegionStats> filter_noise(std::span<const RegionStats> regions) {
  std::vector<RegionStats> kept;
  kept.reserve(regions.size());
  for (const auto& r : regions)
    if (r.bbox_width() >= 2 && r.bbox_height() >= 2) kept.push_back(r);
  return kept;
}

double norm_aspect_ratio(int bbox_w, int bbox_h, int img_w, int img_h) {
  const int longest = std::max(img_w, img_h);
  if (longest <= 1) return 0.0;
  const double v = std::log(static_cast<double>(bbox_w) / bbox_h) / std::log(static_cast<double>(longest));
  return std::clamp(v, -1.0, 1.0);
}

std::vector<ProtoObject> extract_features(std::span<const RegionStats> regions, int img_w, int img_h,
                                          int bits) {
  const double max_level = static_cast<double>((1 << bits) - 1);
  const double img_area = static_cast<double>(img_w) * img_h;
  auto signed_unit = [](double frac) { return std::clamp(2.0 * frac - 1.0, -1.0, 1.0); };
  auto coord = [&](double c, int extent) { return extent > 1 ? signed_unit(c / (extent - 1)) : 0.0; };

  std::vector<ProtoObject> out;
  out.reserve(regions.size());
  for (const auto& r : regions) {
    ProtoObject obj;
    obj.raw = r;
    auto& f = obj.features;
    const auto lv = bin_levels(static_cast<int>(r.bin), bits);
    for (int c = 0; c < 3; ++c) f[kRed + c] = signed_unit(lv[c] / max_level);
    const int bw = r.bbox_width();
    const int bh = r.bbox_height();
    const double bbox_px = static_cast<double>(bw) * bh;
    f[kComX] = coord(r.centroid_x(), img_w);
    f[kComY] = coord(r.centroid_y(), img_h);
    f[kArea] = signed_unit(r.pixel_count / img_area);
    f[kBboxWidth] = signed_unit(static_cast<double>(bw) / img_w);
    f[kBboxHeight] = signed_unit(static_cast<double>(bh) / img_h);
    f[kBboxArea] = signed_unit(bbox_px / img_area);
    f[kAspectRatio] = norm_aspect_ratio(bw, bh, img_w, img_h);
    f[kExtent] = signed_unit(r.pixel_count / bbox_px);
    out.push_back(obj);
  }
  return out;
}

std::vector<ProtoObject> segment(const QuantizedImage& image, Connectivity connectivity) {
  const auto labeling = label_components(image, connectivity);
  const auto kept = filter_noise(labeling.regions);
  return extract_features(kept, image.width, image.height, image.bits);
}

}  // namespace protoattn
