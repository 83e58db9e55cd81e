#include "transform.hpp"

#include <cmath>
#include <numbers>

namespace fusqa {

std::pair<GrayImage, LabelMask> geometric_transform(const GrayImage& image,
                                                    const LabelMask& mask,
                                                    const TransformParams& params) {
  if (image.width != mask.width || image.height != mask.height) {
    throw DataError("image and mask dimensions do not match");
  }
  if (!(params.scale > 0.0)) throw UsageError("scale must be positive");

  const int w = image.width, h = image.height;
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double rad = params.rotate_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(rad), sin_t = std::sin(rad);
  const double inv_s = 1.0 / params.scale;

  GrayImage out_img(w, h, image.spacing_mm, 0.0f);
  LabelMask out_mask(w, h, mask.spacing_mm, 0);

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      // Forward map is flip, then scale, then rotate, all about the center;
      // here we invert it to find the source location of (r, c).
      const double dx = c - cx;
      const double dy = r - cy;
      double ux = (cos_t * dx + sin_t * dy) * inv_s;
      double uy = (-sin_t * dx + cos_t * dy) * inv_s;
      if (params.hflip) ux = -ux;
      const double sx = cx + ux;
      const double sy = cy + uy;

      // Mask: nearest neighbor, labels are categorical.
      const int nr = static_cast<int>(std::floor(sy + 0.5));
      const int nc = static_cast<int>(std::floor(sx + 0.5));
      if (nr >= 0 && nr < h && nc >= 0 && nc < w) {
        out_mask.at(r, c) = mask.at(nr, nc);
      }

      // Image: bilinear with zero outside.
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      auto sample = [&](int y, int x) -> double {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
        return image.at(y, x);
      };
      const double v = (1.0 - fy) * ((1.0 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                       fy * ((1.0 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
      out_img.at(r, c) = static_cast<float>(v);
    }
  }
  return {std::move(out_img), std::move(out_mask)};
}

}  // namespace fusqa
