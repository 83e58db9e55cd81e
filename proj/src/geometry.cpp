#include "geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fusqa {

namespace {

int64_t sq_dist(Pixel a, Pixel b) {
  const int64_t dr = a.row - b.row;
  const int64_t dc = a.col - b.col;
  return dr * dr + dc * dc;
}

// Cross product (b - a) x (c - a) in (x, y) = (col, row) coordinates.
int64_t cross(Pixel a, Pixel b, Pixel c) {
  const int64_t abx = b.col - a.col, aby = b.row - a.row;
  const int64_t acx = c.col - a.col, acy = c.row - a.row;
  return abx * acy - aby * acx;
}

struct Candidate {
  int64_t sq = -1;
  Pixel p1, p2;

  void offer(Pixel a, Pixel b) {
    if (b < a) std::swap(a, b);
    const int64_t d = sq_dist(a, b);
    if (d > sq || (d == sq && (a < p1 || (a == p1 && b < p2)))) {
      sq = d;
      p1 = a;
      p2 = b;
    }
  }
};

}  // namespace

std::vector<Pixel> convex_hull(std::vector<Pixel> pts) {
  std::sort(pts.begin(), pts.end(), [](Pixel a, Pixel b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;

  // Monotone chain; `<= 0` pops collinear vertices, so the hull is strict.
  std::vector<Pixel> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

DiameterResult max_pairwise_distance(const PixelSet& set) {
  const auto& pts = set.points();
  if (pts.size() < 2) throw DataError("degenerate point set");

  Candidate best;
  if (pts.size() < 16) {
    for (size_t i = 0; i < pts.size(); ++i) {
      for (size_t j = i + 1; j < pts.size(); ++j) {
        best.offer(pts[i], pts[j]);
      }
    }
    return {best.p1, best.p2, std::sqrt(static_cast<double>(best.sq))};
  }

  const std::vector<Pixel> hull = convex_hull(pts);
  const size_t m = hull.size();
  if (m == 2) {
    best.offer(hull[0], hull[1]);
    return {best.p1, best.p2, std::sqrt(static_cast<double>(best.sq))};
  }

  // Rotating calipers over the strictly convex hull. All interior vertices
  // lie strictly left of each directed edge, so the signed area comparison
  // walks the antipodal point monotonically.
  int64_t max_sq = 0;
  size_t j = 1;
  for (size_t i = 0; i < m; ++i) {
    const Pixel a = hull[i];
    const Pixel b = hull[(i + 1) % m];
    while (cross(a, b, hull[(j + 1) % m]) > cross(a, b, hull[j])) {
      j = (j + 1) % m;
    }
    max_sq = std::max({max_sq, sq_dist(a, hull[j]), sq_dist(b, hull[j])});
  }

  // Canonical tie-break: smallest (p1, p2) among hull pairs at the maximum.
  for (size_t i = 0; i < m; ++i) {
    for (size_t k = i + 1; k < m; ++k) {
      if (sq_dist(hull[i], hull[k]) == max_sq) best.offer(hull[i], hull[k]);
    }
  }
  return {best.p1, best.p2, std::sqrt(static_cast<double>(max_sq))};
}

}  // namespace fusqa
