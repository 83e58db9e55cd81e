#include "phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "biometry.hpp"
#include "errors.hpp"

namespace fusqa {

namespace {

// Seed streams so geometry and speckle draws never alias.
constexpr uint64_t kGeometryStream = 1;
constexpr uint64_t kSpeckleStream = 2;
constexpr uint64_t kRetryStream = 100;

struct Frame {
  double u_head;      // head centre along the fetus axis
  double u_palate;    // palate centre along the fetus axis
  double v_palate;    // palate centre across the axis (mouth-roof side)
  double mid_u;       // midpoint of the fetus bounding box
  double half_len;    // half extent along the axis
  double half_wide;   // half extent across the axis
  double half_band;   // gap band half width
};

Frame frame_of(const PhantomParams& p) {
  Frame f;
  f.u_head = p.body_axis_a_mm + p.gap_width_mm + p.head_axis_a_mm;
  f.u_palate = f.u_head - 0.4 * p.head_axis_a_mm;
  // Off the major axis: an on-axis palate would leave the head mirror
  // symmetric, making a vertically flipped head indistinguishable from the
  // original at shallow poses.
  f.v_palate = 0.35 * p.head_axis_b_mm;
  double u_min = -p.body_axis_a_mm;
  double u_max = f.u_head + p.head_axis_a_mm;
  f.mid_u = 0.5 * (u_min + u_max);
  f.half_len = 0.5 * (u_max - u_min);
  f.half_wide = std::max(p.body_axis_b_mm, p.head_axis_b_mm);
  f.half_band = 0.5 * std::min(p.body_axis_b_mm, p.head_axis_b_mm);
  return f;
}

// True when the rotated fetus bounding box keeps a two-pixel border margin
// and the palate disk sits inside the head with a 1.5-pixel margin.
bool fits_grid(const PhantomParams& p) {
  if (p.image_size < 8 || !(p.spacing_mm > 0.0)) return false;
  Frame f = frame_of(p);
  double limit = 0.5 * p.image_size * p.spacing_mm - 2.0 * p.spacing_mm;
  double th = p.pose_deg * std::acos(-1.0) / 180.0;
  double c = std::cos(th), s = std::sin(th);
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      double dx = sx * f.half_len, dy = sy * f.half_wide;
      if (std::abs(dx * c - dy * s) > limit) return false;
      if (std::abs(dx * s + dy * c) > limit) return false;
    }
  }
  // Palate containment: the disk centre must lie inside the head ellipse
  // shrunk by radius + margin on both semi-axes (conservative for margins
  // well under the vertex curvature radius).
  double palate_margin = 1.5 * p.spacing_mm;
  double ra = p.head_axis_a_mm - p.palate_radius_mm - palate_margin;
  double rb = p.head_axis_b_mm - p.palate_radius_mm - palate_margin;
  if (ra <= 0.0 || rb <= 0.0) return false;
  double du = f.u_palate - f.u_head;
  if (du * du / (ra * ra) + f.v_palate * f.v_palate / (rb * rb) > 1.0) return false;
  if (f.half_band < p.spacing_mm) return false;
  return true;
}

double in_range(Rng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

}  // namespace

PhantomParams draw_params(uint64_t seed, const PhantomConfig& config) {
  Rng rng(seed, kGeometryStream);
  for (int attempt = 0; attempt < 32; ++attempt) {
    PhantomParams p;
    p.image_size = config.image_size;
    p.spacing_mm = config.spacing_mm;
    double h0 = in_range(rng, config.head_axis_lo_mm, config.head_axis_hi_mm);
    double h1 = in_range(rng, config.head_axis_lo_mm, config.head_axis_hi_mm);
    p.head_axis_a_mm = std::max(h0, h1);
    p.head_axis_b_mm = std::min(h0, h1);
    double b0 = in_range(rng, config.body_axis_lo_mm, config.body_axis_hi_mm);
    double b1 = in_range(rng, config.body_axis_lo_mm, config.body_axis_hi_mm);
    p.body_axis_a_mm = std::max(b0, b1);
    p.body_axis_b_mm = std::min(b0, b1);
    p.gap_width_mm = in_range(rng, config.gap_lo_mm, config.gap_hi_mm);
    p.palate_radius_mm = in_range(rng, config.palate_lo_mm, config.palate_hi_mm);
    p.pose_deg = in_range(rng, -config.pose_max_abs_deg, config.pose_max_abs_deg);
    p.class_intensity = config.class_intensity;
    p.speckle_strength = config.speckle_strength;
    p.blur_radius_px = config.blur_radius_px;
    // Acquisition jitter draws stay domain-independent so a seed maps to the
    // same acquisition in both domains; the domain B profile shifts on top.
    double gain = in_range(rng, -config.gain_jitter, config.gain_jitter);
    for (double& v : p.class_intensity) v = std::clamp(v + gain, 0.0, 1.0);
    p.speckle_strength *= in_range(rng, 1.0 - config.speckle_jitter,
                                   1.0 + config.speckle_jitter);
    if (config.blur_jitter_px > 0) {
      p.blur_radius_px += static_cast<int>(rng.below(
          static_cast<uint64_t>(config.blur_jitter_px) + 1));
    }
    p.domain = config.domain;
    if (config.domain == 'B') {
      // Domain shift changes rendering only; geometry draws above are
      // untouched so a seed maps to the same anatomy in both domains.
      for (double& v : p.class_intensity) {
        v = std::min(1.0, v + config.domain_b_intensity_shift);
      }
      p.speckle_strength *= config.domain_b_speckle_factor;
      p.blur_radius_px += config.domain_b_blur_extra_px;
    }
    if (fits_grid(p)) return p;
  }
  throw DataError("phantom out of bounds");
}

LabelMask rasterize_mask(const PhantomParams& p) {
  if (!fits_grid(p)) throw DataError("phantom out of bounds");
  Frame f = frame_of(p);
  double th = p.pose_deg * std::acos(-1.0) / 180.0;
  double c = std::cos(th), s = std::sin(th);
  double centre = 0.5 * p.image_size * p.spacing_mm;

  LabelMask mask;
  mask.width = p.image_size;
  mask.height = p.image_size;
  mask.spacing_mm = p.spacing_mm;
  mask.labels.assign(static_cast<size_t>(p.image_size) * p.image_size, kBackground);

  double ah2 = p.head_axis_a_mm * p.head_axis_a_mm;
  double bh2 = p.head_axis_b_mm * p.head_axis_b_mm;
  double ab2 = p.body_axis_a_mm * p.body_axis_a_mm;
  double bb2 = p.body_axis_b_mm * p.body_axis_b_mm;
  double rp2 = p.palate_radius_mm * p.palate_radius_mm;

  for (int r = 0; r < p.image_size; ++r) {
    for (int col = 0; col < p.image_size; ++col) {
      double x = (col + 0.5) * p.spacing_mm - centre;
      double y = (r + 0.5) * p.spacing_mm - centre;
      // Image -> fetus frame: undo the pose rotation, restore the axis shift.
      double u = x * c + y * s + f.mid_u;
      double v = -x * s + y * c;
      uint8_t label = kBackground;
      double du = u - f.u_head;
      if (du * du / ah2 + v * v / bh2 <= 1.0) {
        double dp = u - f.u_palate;
        double dq = v - f.v_palate;
        label = (dp * dp + dq * dq <= rp2) ? kPalate : kHead;
      } else if (u * u / ab2 + v * v / bb2 <= 1.0) {
        label = kBody;
      } else if (std::abs(v) <= f.half_band) {
        double body_face = p.body_axis_a_mm * std::sqrt(1.0 - v * v / bb2);
        double head_face =
            f.u_head - p.head_axis_a_mm * std::sqrt(1.0 - v * v / bh2);
        if (u > body_face && u < head_face) label = kGap;
      }
      mask.at(r, col) = label;
    }
  }
  return mask;
}

GrayImage render_image(const LabelMask& mask, const PhantomParams& p, uint64_t seed) {
  mask.validate();
  Rng rng(seed, kSpeckleStream);
  int w = mask.width, h = mask.height;
  // Keep the pre-blur plane in double: narrowing to float here can push a
  // class mean across the 8-bit rounding boundary (e.g. 0.90 * 255 = 229.5).
  std::vector<double> speckled(static_cast<size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double mean = p.class_intensity[mask.at(r, c)];
      double noise = 1.0 + p.speckle_strength * (2.0 * rng.uniform01() - 1.0);
      speckled[static_cast<size_t>(r) * w + c] = mean * noise;
    }
  }

  GrayImage img;
  img.width = w;
  img.height = h;
  img.spacing_mm = mask.spacing_mm;
  img.data.resize(speckled.size());
  int k = std::max(0, p.blur_radius_px);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      // Box blur with the window clipped at the border and normalized by the
      // pixels actually covered, so edges are not darkened.
      double sum = 0.0;
      int count = 0;
      for (int rr = std::max(0, r - k); rr <= std::min(h - 1, r + k); ++rr) {
        for (int cc = std::max(0, c - k); cc <= std::min(w - 1, c + k); ++cc) {
          sum += speckled[static_cast<size_t>(rr) * w + cc];
          ++count;
        }
      }
      double v = std::clamp(sum / count, 0.0, 1.0);
      // Snap to the 8-bit grid so a PGM write/read roundtrip is bit exact.
      img.at(r, c) = static_cast<float>(std::lround(v * 255.0) / 255.0);
    }
  }
  return img;
}

PhantomSample generate_phantom(uint64_t seed, const PhantomParams& params) {
  PhantomSample out;
  out.seed = seed;
  out.params = params;
  out.mask = rasterize_mask(params);
  out.image = render_image(out.mask, params, seed);
  CrlMeasurement m = measure_crl(out.mask);
  out.true_crl_mm = m.length_mm;
  out.true_ga_days = ga_from_crl(m.length_mm);
  return out;
}

std::vector<PhantomSample> generate_phantoms(uint64_t base_seed, int count,
                                             const PhantomConfig& config) {
  if (count < 0) throw UsageError("phantom count must be non-negative");
  std::vector<PhantomSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    uint64_t s0 = base_seed + static_cast<uint64_t>(i);
    bool done = false;
    for (int attempt = 0; attempt < 16 && !done; ++attempt) {
      uint64_t sk = attempt == 0
                        ? s0
                        : derive_seed(s0, kRetryStream + static_cast<uint64_t>(attempt));
      PhantomSample sample;
      try {
        sample = generate_phantom(sk, draw_params(sk, config));
      } catch (const DataError&) {
        continue;  // unfit or undatable draw; retry with a re-derived seed
      }
      auto counts = sample.mask.class_counts();
      if (std::any_of(counts.begin(), counts.end(), [](int64_t n) { return n == 0; })) {
        continue;  // a class rasterized to zero pixels; retry
      }
      char id[16];
      std::snprintf(id, sizeof id, "%c%05d", config.domain, i);
      sample.id = id;
      out.push_back(std::move(sample));
      done = true;
    }
    if (!done) throw DataError("phantom out of bounds");
  }
  return out;
}

}  // namespace fusqa
