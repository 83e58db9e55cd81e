#pragma once

#include <filesystem>

#include "grid.hpp"

namespace fusqa {

// Binary PGM (P5, maxval 255). Image intensities are quantized as
// round(v * 255); mask files store the raw label value per pixel.

void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const LabelMask& mask);

GrayImage read_pgm_image(const std::filesystem::path& path, double spacing_mm);
LabelMask read_pgm_mask(const std::filesystem::path& path, double spacing_mm);

}  // namespace fusqa
