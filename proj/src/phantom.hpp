#pragma once

#include <array>
#include <string>
#include <vector>

#include "grid.hpp"
#include "rng.hpp"

namespace fusqa {

/// Fully resolved geometry and rendering parameters for one phantom.
/// Distances are millimeters in the unrotated fetus frame: the body ellipse
/// sits at the origin, the gap band and the head follow along +u, and the
/// palate is a disk strictly inside the head.
struct PhantomParams {
  int image_size = 64;
  double spacing_mm = 1.0;
  double head_axis_a_mm = 8.0;
  double head_axis_b_mm = 7.0;
  double body_axis_a_mm = 13.0;
  double body_axis_b_mm = 12.0;
  double gap_width_mm = 1.5;
  double palate_radius_mm = 1.5;
  double pose_deg = 0.0;
  std::array<double, kNumClasses> class_intensity = {0.10, 0.50, 0.65, 0.25, 0.90};
  double speckle_strength = 0.15;
  int blur_radius_px = 1;
  char domain = 'A';

  bool operator==(const PhantomParams&) const = default;
};

/// Randomization ranges and rendering profile used to draw PhantomParams.
/// Domain B changes rendering only (intensity shift, stronger speckle, more
/// blur); the geometry distribution is shared with domain A.
struct PhantomConfig {
  int image_size = 64;
  double spacing_mm = 1.0;
  char domain = 'A';
  double head_axis_lo_mm = 6.0, head_axis_hi_mm = 10.0;
  double body_axis_lo_mm = 10.0, body_axis_hi_mm = 16.0;
  double gap_lo_mm = 1.0, gap_hi_mm = 2.0;
  double palate_lo_mm = 1.0, palate_hi_mm = 2.0;
  double pose_max_abs_deg = 30.0;
  std::array<double, kNumClasses> class_intensity = {0.10, 0.50, 0.65, 0.25, 0.90};
  double speckle_strength = 0.15;
  int blur_radius_px = 1;
  // Per-phantom acquisition jitter: a gain offset added to every class mean,
  // a multiplicative speckle factor, and extra blur pixels. Emulates scanner
  // gain/noise variation within one site.
  double gain_jitter = 0.10;
  double speckle_jitter = 0.25;
  int blur_jitter_px = 1;
  double domain_b_intensity_shift = 0.10;
  double domain_b_speckle_factor = 1.5;
  int domain_b_blur_extra_px = 1;
};

struct PhantomSample {
  std::string id;
  GrayImage image;
  LabelMask mask;
  double true_crl_mm = 0.0;
  double true_ga_days = 0.0;
  uint64_t seed = 0;
  PhantomParams params;

  bool operator==(const PhantomSample&) const = default;
};

/// Draws concrete parameters from the config's ranges. Geometry comes from a
/// stream that ignores the domain tag, so a given seed yields the same shape
/// in domain A and B.
PhantomParams draw_params(uint64_t seed, const PhantomConfig& config);

/// Rasterizes the class labels for the given geometry. Throws
/// DataError("phantom out of bounds") when the rotated fetus does not fit.
LabelMask rasterize_mask(const PhantomParams& params);

/// Speckled, blurred rendering of a mask; intensities are quantized to the
/// 8-bit grid so on-disk PGM roundtrips are bit-exact.
GrayImage render_image(const LabelMask& mask, const PhantomParams& params, uint64_t seed);

/// Rasterize + render + measure. Deterministic in (seed, params).
PhantomSample generate_phantom(uint64_t seed, const PhantomParams& params);

/// Draws and generates `count` phantoms with per-index seeds derived from
/// base_seed. Unfit draws are retried deterministically.
std::vector<PhantomSample> generate_phantoms(uint64_t base_seed, int count,
                                             const PhantomConfig& config);

}  // namespace fusqa
