#pragma once

#include <vector>

#include "grid.hpp"

namespace fusqa {

struct DiameterResult {
  Pixel p1;
  Pixel p2;
  double dist_px = 0.0;
};

/// Strict convex hull (no collinear vertices) in counterclockwise order
/// for y-down pixel coordinates. Input may be unsorted; duplicates are fine.
std::vector<Pixel> convex_hull(std::vector<Pixel> pts);

/// Farthest pair of the set. Convex hull + rotating calipers, brute force
/// below 16 points. Ties resolved to the lexicographically smallest
/// (p1, p2) with p1 <= p2. Throws DataError("degenerate point set") for
/// fewer than 2 points.
DiameterResult max_pairwise_distance(const PixelSet& set);

}  // namespace fusqa
