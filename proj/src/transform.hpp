#pragma once

#include <utility>

#include "grid.hpp"

namespace fusqa {

struct TransformParams {
  double scale = 1.0;
  double rotate_deg = 0.0;
  bool hflip = false;
};

/// Applies the same flip/scale/rotation about the grid center to both grids.
/// The image is resampled bilinearly, the mask nearest-neighbor; source
/// locations outside the grid map to background / zero intensity. Output
/// dimensions equal the input's. Identity parameters reproduce the inputs
/// bit-exactly.
std::pair<GrayImage, LabelMask> geometric_transform(const GrayImage& image,
                                                    const LabelMask& mask,
                                                    const TransformParams& params);

}  // namespace fusqa
