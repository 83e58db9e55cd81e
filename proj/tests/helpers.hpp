#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "grid.hpp"

namespace testutil {

/// Builds a mask from rows of digit characters '0'..'4'.
inline fusqa::LabelMask mask_from_rows(const std::vector<std::string>& rows,
                                       double spacing = 1.0) {
  int h = static_cast<int>(rows.size());
  int w = h > 0 ? static_cast<int>(rows[0].size()) : 0;
  fusqa::LabelMask mask(w, h, spacing);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      mask.at(r, c) = static_cast<uint8_t>(rows[r][c] - '0');
    }
  }
  return mask;
}

inline fusqa::PixelSet set_of(std::initializer_list<fusqa::Pixel> pts) {
  return fusqa::PixelSet(std::vector<fusqa::Pixel>(pts));
}

/// Axis-aligned filled block [r0..r1] x [c0..c1].
inline fusqa::PixelSet block(int r0, int c0, int r1, int c1) {
  std::vector<fusqa::Pixel> pts;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) pts.push_back({r, c});
  }
  return fusqa::PixelSet(std::move(pts));
}

/// Stamps every pixel of `px` onto `mask` with the given class.
inline void paint(fusqa::LabelMask& mask, const fusqa::PixelSet& px,
                  uint8_t class_id) {
  for (const fusqa::Pixel& p : px.points()) mask.at(p.row, p.col) = class_id;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path tmp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fusqa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
