#pragma once

#include <vector>

#include "grid.hpp"

namespace fusqa {

// Binary morphology with the fixed full 3x3 (8-connected) structuring
// element. Border policy: dilation clips to the grid, erosion treats
// out-of-bounds neighbors as absent, so border pixels always erode away.

PixelSet dilate(const PixelSet& set, int grid_w, int grid_h, int iterations);

PixelSet erode(const PixelSet& set, int grid_w, int grid_h, int iterations);

/// dilate(set, 1) minus set; disjoint from the input by construction.
PixelSet outer_contour(const PixelSet& set, int grid_w, int grid_h);

/// Partition under 8-connectivity, ordered by each component's smallest
/// (row, col) member.
std::vector<PixelSet> connected_components(const PixelSet& set);

}  // namespace fusqa
