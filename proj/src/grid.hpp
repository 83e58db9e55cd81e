#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace fusqa {

inline constexpr int kNumClasses = 5;

enum : uint8_t {
  kBackground = 0,
  kBody = 1,
  kHead = 2,
  kGap = 3,
  kPalate = 4,
};

struct Pixel {
  int32_t row = 0;
  int32_t col = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Duplicate-free set of grid coordinates, kept sorted by (row, col) so that
/// equal sets compare equal and every operation on them is deterministic.
class PixelSet {
 public:
  PixelSet() = default;
  explicit PixelSet(std::vector<Pixel> pts);

  /// Adopts an already sorted, duplicate-free vector without re-checking.
  static PixelSet from_sorted(std::vector<Pixel> pts);

  const std::vector<Pixel>& points() const { return pts_; }
  size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  bool contains(Pixel p) const;
  bool operator==(const PixelSet&) const = default;

 private:
  std::vector<Pixel> pts_;
};

/// 2D grayscale image, row-major intensities in [0, 1], isotropic spacing.
struct GrayImage {
  int width = 0;
  int height = 0;
  double spacing_mm = 1.0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, double spacing, float fill = 0.0f);

  float at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
  float& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }

  /// Throws DataError unless dimensions are >= 8 and every value is finite
  /// and within [0, 1].
  void validate() const;

  bool operator==(const GrayImage&) const = default;
};

/// 2D label grid over {0=background, 1=body, 2=head, 3=gap, 4=palate}.
struct LabelMask {
  int width = 0;
  int height = 0;
  double spacing_mm = 1.0;
  std::vector<uint8_t> labels;

  LabelMask() = default;
  LabelMask(int w, int h, double spacing, uint8_t fill = 0);

  uint8_t at(int r, int c) const { return labels[static_cast<size_t>(r) * width + c]; }
  uint8_t& at(int r, int c) { return labels[static_cast<size_t>(r) * width + c]; }

  void validate() const;
  std::array<size_t, kNumClasses> class_counts() const;

  bool operator==(const LabelMask&) const = default;
};

/// All pixels whose label equals class_id, as a sorted PixelSet.
PixelSet binary_of_class(const LabelMask& mask, int class_id);

/// Dice overlap of one class between two same-sized masks. Both supports
/// empty counts as 1.0.
double dice(const LabelMask& a, const LabelMask& b, int class_id);

}  // namespace fusqa
