#include "morphology.hpp"

#include <algorithm>
#include <string>

namespace fusqa {

namespace {

void check_grid(const PixelSet& set, int grid_w, int grid_h) {
  if (grid_w <= 0 || grid_h <= 0) {
    throw UsageError("grid dimensions must be positive");
  }
  for (const Pixel& p : set.points()) {
    if (p.row < 0 || p.row >= grid_h || p.col < 0 || p.col >= grid_w) {
      throw DataError("pixel (" + std::to_string(p.row) + "," +
                      std::to_string(p.col) + ") outside grid");
    }
  }
}

std::vector<uint8_t> to_bitmap(const PixelSet& set, int grid_w, int grid_h) {
  std::vector<uint8_t> g(static_cast<size_t>(grid_w) * grid_h, 0);
  for (const Pixel& p : set.points()) {
    g[static_cast<size_t>(p.row) * grid_w + p.col] = 1;
  }
  return g;
}

PixelSet from_bitmap(const std::vector<uint8_t>& g, int grid_w, int grid_h) {
  std::vector<Pixel> pts;
  for (int r = 0; r < grid_h; ++r) {
    for (int c = 0; c < grid_w; ++c) {
      if (g[static_cast<size_t>(r) * grid_w + c]) pts.push_back({r, c});
    }
  }
  return PixelSet::from_sorted(std::move(pts));
}

}  // namespace

PixelSet dilate(const PixelSet& set, int grid_w, int grid_h, int iterations) {
  if (iterations < 1) throw UsageError("dilate requires iterations >= 1");
  check_grid(set, grid_w, grid_h);
  if (set.empty()) return {};

  std::vector<uint8_t> cur = to_bitmap(set, grid_w, grid_h);
  std::vector<uint8_t> next(cur.size());
  for (int it = 0; it < iterations; ++it) {
    for (int r = 0; r < grid_h; ++r) {
      for (int c = 0; c < grid_w; ++c) {
        uint8_t v = 0;
        for (int dr = -1; dr <= 1 && !v; ++dr) {
          const int rr = r + dr;
          if (rr < 0 || rr >= grid_h) continue;
          for (int dc = -1; dc <= 1; ++dc) {
            const int cc = c + dc;
            if (cc < 0 || cc >= grid_w) continue;
            if (cur[static_cast<size_t>(rr) * grid_w + cc]) {
              v = 1;
              break;
            }
          }
        }
        next[static_cast<size_t>(r) * grid_w + c] = v;
      }
    }
    std::swap(cur, next);
  }
  return from_bitmap(cur, grid_w, grid_h);
}

PixelSet erode(const PixelSet& set, int grid_w, int grid_h, int iterations) {
  if (iterations < 1) throw UsageError("erode requires iterations >= 1");
  check_grid(set, grid_w, grid_h);
  if (set.empty()) return {};

  std::vector<uint8_t> cur = to_bitmap(set, grid_w, grid_h);
  std::vector<uint8_t> next(cur.size());
  for (int it = 0; it < iterations; ++it) {
    for (int r = 0; r < grid_h; ++r) {
      for (int c = 0; c < grid_w; ++c) {
        uint8_t v = 0;
        // Border pixels have an out-of-bounds neighbor and never survive.
        if (r > 0 && r < grid_h - 1 && c > 0 && c < grid_w - 1) {
          v = 1;
          for (int dr = -1; dr <= 1 && v; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              if (!cur[static_cast<size_t>(r + dr) * grid_w + (c + dc)]) {
                v = 0;
                break;
              }
            }
          }
        }
        next[static_cast<size_t>(r) * grid_w + c] = v;
      }
    }
    std::swap(cur, next);
  }
  return from_bitmap(cur, grid_w, grid_h);
}

PixelSet outer_contour(const PixelSet& set, int grid_w, int grid_h) {
  if (set.empty()) return {};
  const PixelSet dilated = dilate(set, grid_w, grid_h, 1);
  std::vector<Pixel> ring;
  std::set_difference(dilated.points().begin(), dilated.points().end(),
                      set.points().begin(), set.points().end(),
                      std::back_inserter(ring));
  return PixelSet::from_sorted(std::move(ring));
}

std::vector<PixelSet> connected_components(const PixelSet& set) {
  std::vector<PixelSet> out;
  if (set.empty()) return out;

  const auto& pts = set.points();
  int max_r = 0, max_c = 0;
  for (const Pixel& p : pts) {
    if (p.row < 0 || p.col < 0) throw DataError("negative pixel coordinate");
    max_r = std::max(max_r, p.row);
    max_c = std::max(max_c, p.col);
  }
  const int h = max_r + 1, w = max_c + 1;

  std::vector<uint8_t> present(static_cast<size_t>(w) * h, 0);
  std::vector<uint8_t> seen(present.size(), 0);
  for (const Pixel& p : pts) {
    present[static_cast<size_t>(p.row) * w + p.col] = 1;
  }

  std::vector<Pixel> stack;
  for (const Pixel& seed : pts) {  // sorted order => components come out ordered
    const size_t si = static_cast<size_t>(seed.row) * w + seed.col;
    if (seen[si]) continue;
    seen[si] = 1;
    stack.assign(1, seed);
    std::vector<Pixel> comp;
    while (!stack.empty()) {
      const Pixel p = stack.back();
      stack.pop_back();
      comp.push_back(p);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = p.row + dr, cc = p.col + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const size_t i = static_cast<size_t>(rr) * w + cc;
          if (present[i] && !seen[i]) {
            seen[i] = 1;
            stack.push_back({rr, cc});
          }
        }
      }
    }
    out.emplace_back(std::move(comp));  // PixelSet ctor sorts the component
  }
  return out;
}

}  // namespace fusqa
