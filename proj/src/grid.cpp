#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fusqa {

PixelSet::PixelSet(std::vector<Pixel> pts) : pts_(std::move(pts)) {
  std::sort(pts_.begin(), pts_.end());
  pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
}

PixelSet PixelSet::from_sorted(std::vector<Pixel> pts) {
  PixelSet s;
  s.pts_ = std::move(pts);
  return s;
}

bool PixelSet::contains(Pixel p) const {
  return std::binary_search(pts_.begin(), pts_.end(), p);
}

GrayImage::GrayImage(int w, int h, double spacing, float fill)
    : width(w), height(h), spacing_mm(spacing),
      data(static_cast<size_t>(w) * h, fill) {}

void GrayImage::validate() const {
  if (width < 8 || height < 8) {
    throw DataError("image dimensions must be at least 8x8, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  if (data.size() != static_cast<size_t>(width) * height) {
    throw DataError("image buffer size does not match dimensions");
  }
  if (spacing_mm <= 0.0 || !std::isfinite(spacing_mm)) {
    throw DataError("image spacing must be positive and finite");
  }
  for (float v : data) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw DataError("image intensity outside [0,1]");
    }
  }
}

LabelMask::LabelMask(int w, int h, double spacing, uint8_t fill)
    : width(w), height(h), spacing_mm(spacing),
      labels(static_cast<size_t>(w) * h, fill) {}

void LabelMask::validate() const {
  if (width <= 0 || height <= 0) {
    throw DataError("mask dimensions must be positive");
  }
  if (labels.size() != static_cast<size_t>(width) * height) {
    throw DataError("mask buffer size does not match dimensions");
  }
  if (spacing_mm <= 0.0 || !std::isfinite(spacing_mm)) {
    throw DataError("mask spacing must be positive and finite");
  }
  for (uint8_t v : labels) {
    if (v >= kNumClasses) {
      throw DataError("mask label outside {0..4}");
    }
  }
}

std::array<size_t, kNumClasses> LabelMask::class_counts() const {
  std::array<size_t, kNumClasses> counts{};
  for (uint8_t v : labels) {
    if (v < kNumClasses) ++counts[v];
  }
  return counts;
}

PixelSet binary_of_class(const LabelMask& mask, int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw UsageError("class_id must be in {0..4}");
  }
  std::vector<Pixel> pts;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c) == class_id) pts.push_back({r, c});
    }
  }
  // Row-major scan already yields sorted (row, col) order.
  return PixelSet::from_sorted(std::move(pts));
}

double dice(const LabelMask& a, const LabelMask& b, int class_id) {
  if (a.width != b.width || a.height != b.height) {
    throw DataError("dice requires same-sized masks");
  }
  size_t na = 0, nb = 0, inter = 0;
  for (size_t i = 0; i < a.labels.size(); ++i) {
    const bool ia = a.labels[i] == class_id;
    const bool ib = b.labels[i] == class_id;
    na += ia;
    nb += ib;
    inter += ia && ib;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

}  // namespace fusqa
