#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "geometry.hpp"
#include "helpers.hpp"
#include "rng.hpp"

using namespace fusqa;
using testutil::set_of;

namespace {

// Exhaustive farthest-pair scan with the library's tie rule.
DiameterResult brute_force(const PixelSet& set) {
  const auto& pts = set.points();
  DiameterResult best;
  int64_t best_d2 = -1;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      Pixel a = pts[i], b = pts[j];
      if (b < a) std::swap(a, b);
      int64_t dr = a.row - b.row, dc = a.col - b.col;
      int64_t d2 = dr * dr + dc * dc;
      bool better = d2 > best_d2 ||
                    (d2 == best_d2 &&
                     (a < best.p1 || (a == best.p1 && b < best.p2)));
      if (better) {
        best_d2 = d2;
        best.p1 = a;
        best.p2 = b;
      }
    }
  }
  best.dist_px = std::sqrt(static_cast<double>(best_d2));
  return best;
}

}  // namespace

TEST_CASE("farthest pair on simple sets") {
  auto r = max_pairwise_distance(set_of({{0, 0}, {3, 4}}));
  CHECK(r.dist_px == 5.0);
  CHECK(r.p1 == Pixel{0, 0});
  CHECK(r.p2 == Pixel{3, 4});

  auto corners = max_pairwise_distance(set_of({{0, 0}, {6, 6}, {0, 6}, {6, 0}}));
  CHECK(corners.dist_px == doctest::Approx(6.0 * std::sqrt(2.0)));
  // Two diagonals tie; the lexicographically smaller pair wins.
  CHECK(corners.p1 == Pixel{0, 0});
  CHECK(corners.p2 == Pixel{6, 6});
}

TEST_CASE("degenerate point sets are rejected") {
  CHECK_THROWS_WITH_AS(max_pairwise_distance(PixelSet{}), "degenerate point set",
                       DataError);
  CHECK_THROWS_WITH_AS(max_pairwise_distance(set_of({{2, 2}})),
                       "degenerate point set", DataError);
}

TEST_CASE("identical points collapse to one") {
  PixelSet s(std::vector<Pixel>{{1, 1}, {1, 1}, {4, 5}});
  auto r = max_pairwise_distance(s);
  CHECK(r.dist_px == doctest::Approx(5.0));
}

TEST_CASE("collinear sets take the hull path safely") {
  std::vector<Pixel> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({i, 2 * i});
  auto r = max_pairwise_distance(PixelSet(std::move(pts)));
  CHECK(r.p1 == Pixel{0, 0});
  CHECK(r.p2 == Pixel{39, 78});
}

TEST_CASE("convex hull is strict and counterclockwise for y-down coordinates") {
  // Square plus edge midpoints and an interior point.
  auto hull = convex_hull({{0, 0}, {0, 4}, {4, 0}, {4, 4}, {0, 2}, {2, 0},
                           {2, 4}, {4, 2}, {2, 2}});
  REQUIRE(hull.size() == 4);
  // Cross products over consecutive edges all agree in sign.
  for (size_t i = 0; i < hull.size(); ++i) {
    Pixel a = hull[i], b = hull[(i + 1) % hull.size()], c = hull[(i + 2) % hull.size()];
    int64_t cross = static_cast<int64_t>(b.col - a.col) * (c.row - a.row) -
                    static_cast<int64_t>(b.row - a.row) * (c.col - a.col);
    CHECK(cross > 0);
  }
}

TEST_CASE("calipers matches the exhaustive oracle on random sets") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(rng.below(199));
    std::vector<Pixel> pts;
    for (int i = 0; i < n; ++i) {
      pts.push_back({static_cast<int32_t>(rng.below(64)),
                     static_cast<int32_t>(rng.below(64))});
    }
    PixelSet s(std::move(pts));
    if (s.size() < 2) continue;
    auto fast = max_pairwise_distance(s);
    auto slow = brute_force(s);
    CHECK(fast.p1 == slow.p1);
    CHECK(fast.p2 == slow.p2);
    CHECK(fast.dist_px == doctest::Approx(slow.dist_px).epsilon(1e-12));
  }
}
