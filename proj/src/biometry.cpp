#include "biometry.hpp"

#include <cmath>

#include "errors.hpp"
#include "morphology.hpp"

namespace fusqa {

CrlMeasurement measure_crl(const LabelMask& mask) {
  mask.validate();
  std::vector<Pixel> support;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      uint8_t v = mask.at(r, c);
      if (v == kHead || v == kBody) support.push_back({r, c});
    }
  }
  if (support.empty()) throw DataError("no measurable fetus");
  PixelSet fetus(std::move(support));
  PixelSet contour = outer_contour(fetus, mask.width, mask.height);
  // A fetus flooded to the full grid has no room for an outer band; measure
  // across the support itself in that degenerate case.
  const PixelSet& extent = contour.empty() ? fetus : contour;
  if (extent.size() < 2) {
    // Single-pixel fetus fully eroded against the border cannot happen
    // (dilation always adds neighbours inside an 8x8+ grid), but a one-pixel
    // grid would get here; treat it as unmeasurable rather than zero-length.
    throw DataError("no measurable fetus");
  }
  DiameterResult d = max_pairwise_distance(extent);
  return {d.p1, d.p2, d.dist_px * mask.spacing_mm, extent.size()};
}

double ga_from_crl(double crl_mm, const DatingModel& model) {
  if (!(crl_mm >= model.valid_lo_mm && crl_mm <= model.valid_hi_mm)) {
    throw DataError("CRL outside dating validity");
  }
  return model.c0 + model.c1 * std::sqrt(crl_mm) + model.c2 * crl_mm;
}

DownstreamErrors downstream_errors(const std::vector<DownstreamCase>& cases,
                                   const DatingModel& model) {
  DownstreamErrors out;
  double ga_good = 0.0, ga_poor = 0.0, crl_good = 0.0, crl_poor = 0.0;
  for (const DownstreamCase& c : cases) {
    if (c.mask == nullptr) throw UsageError("downstream case has no mask");
    bool good = c.predicted_good;
    (good ? out.n_good_predicted : out.n_poor_predicted)++;
    double crl = 0.0;
    try {
      crl = measure_crl(*c.mask).length_mm;
    } catch (const DataError&) {
      (good ? out.n_good_unmeasurable : out.n_poor_unmeasurable)++;
      (good ? out.n_good_undatable : out.n_poor_undatable)++;
      continue;
    }
    double ga = 0.0;
    try {
      ga = ga_from_crl(crl, model);
    } catch (const DataError&) {
      (good ? out.n_good_undatable : out.n_poor_undatable)++;
      continue;
    }
    double crl_err = std::abs(crl - c.true_crl_mm);
    double ga_err = std::abs(ga - c.true_ga_days);
    if (good) {
      crl_good += crl_err;
      ga_good += ga_err;
      ++out.n_good;
    } else {
      crl_poor += crl_err;
      ga_poor += ga_err;
      ++out.n_poor;
    }
  }
  if (out.n_good > 0) {
    out.has_good_mean = true;
    out.mean_abs_crl_error_good_mm = crl_good / out.n_good;
    out.mean_abs_ga_error_good_days = ga_good / out.n_good;
  }
  if (out.n_poor > 0) {
    out.has_poor_mean = true;
    out.mean_abs_crl_error_poor_mm = crl_poor / out.n_poor;
    out.mean_abs_ga_error_poor_days = ga_poor / out.n_poor;
  }
  return out;
}

}  // namespace fusqa
