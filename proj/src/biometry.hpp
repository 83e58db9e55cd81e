#pragma once

#include <vector>

#include "geometry.hpp"
#include "grid.hpp"

namespace fusqa {

struct CrlMeasurement {
  Pixel p1;
  Pixel p2;
  double length_mm = 0.0;
  size_t contour_size = 0;  // pixels in the measured contour
};

/// Crown-rump length: the longest distance across the outer contour of the
/// union of head and body, scaled by pixel spacing. Throws
/// DataError("no measurable fetus") when that union is empty.
CrlMeasurement measure_crl(const LabelMask& mask);

/// CRL -> gestational age dating curve, GA(days) = c0 + c1*sqrt(crl) + c2*crl,
/// valid for crl in [valid_lo_mm, valid_hi_mm].
struct DatingModel {
  double c0 = 40.9041;
  double c1 = 3.21585;
  double c2 = 0.348956;
  double valid_lo_mm = 15.0;
  double valid_hi_mm = 95.0;
};

/// Throws DataError("CRL outside dating validity") when crl_mm is outside the
/// model's validity window.
double ga_from_crl(double crl_mm, const DatingModel& model = {});

/// One quality-assessed mask entering the downstream biometry study.
struct DownstreamCase {
  const LabelMask* mask = nullptr;
  double true_crl_mm = 0.0;
  double true_ga_days = 0.0;
  bool predicted_good = false;
};

/// CRL / gestational-age error statistics split by predicted quality. A case
/// contributes to the means only when its mask is measurable AND the measured
/// CRL is inside dating validity; the rest are tallied as undatable (with
/// unmeasurable masks counted separately as well).
struct DownstreamErrors {
  int n_good_predicted = 0;
  int n_poor_predicted = 0;
  int n_good_unmeasurable = 0;
  int n_poor_unmeasurable = 0;
  int n_good_undatable = 0;  // unmeasurable or outside dating validity
  int n_poor_undatable = 0;
  int n_good = 0;  // cases contributing to the good-group means
  int n_poor = 0;
  bool has_good_mean = false;
  bool has_poor_mean = false;
  double mean_abs_crl_error_good_mm = 0.0;
  double mean_abs_crl_error_poor_mm = 0.0;
  double mean_abs_ga_error_good_days = 0.0;
  double mean_abs_ga_error_poor_days = 0.0;
};

DownstreamErrors downstream_errors(const std::vector<DownstreamCase>& cases,
                                   const DatingModel& model = {});

}  // namespace fusqa
