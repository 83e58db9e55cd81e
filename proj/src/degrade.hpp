#pragma once

#include <string>
#include <vector>

#include "grid.hpp"
#include "phantom.hpp"

namespace fusqa {

/// Which alteration produced a mask variant, plus its drawn parameters.
struct DegradeKind {
  enum class Op {
    Original,
    OverDilate,
    OverErode,
    WrongClassPalateToHead,
    DeleteClass,
    FlipClass,
    GoodDilate,
    GoodErode,
  };
  Op op = Op::Original;
  int iterations = 0;  // OverDilate / OverErode
  int class_id = -1;   // DeleteClass / FlipClass / GoodDilate / GoodErode

  bool operator==(const DegradeKind&) const = default;
};

/// True for alterations that keep the mask usable (Original and the two
/// single-iteration touch-ups).
bool is_good_kind(const DegradeKind& kind);

/// Stable text form used in manifests, e.g. "over_dilate(4)", "good_erode(2)".
std::string to_string(const DegradeKind& kind);
DegradeKind parse_degrade_kind(const std::string& text);

/// One (image, mask) training pair with its quality label and origin.
struct Sample {
  std::string id;
  std::string source_id;
  GrayImage image;
  LabelMask mask;
  int quality = 1;  // 1 = good, 0 = poor
  DegradeKind provenance;
  double true_crl_mm = 0.0;
  double true_ga_days = 0.0;
  char domain = 'A';
  uint64_t seed = 0;

  bool operator==(const Sample&) const = default;
};

/// Dilates every foreground class by `iterations` rounds of the 3x3 kernel.
/// Contested pixels go to the higher-priority class (head > body > palate >
/// gap). Requires iterations >= 2.
LabelMask over_dilate(const LabelMask& mask, int iterations);

/// Erodes every foreground class independently; vacated pixels become
/// background. Requires iterations >= 2.
LabelMask over_erode(const LabelMask& mask, int iterations);

/// Relabels every palate pixel as head.
LabelMask wrong_class_palate_to_head(const LabelMask& mask);

/// Clears one foreground class to background (identity when absent).
LabelMask delete_class(const LabelMask& mask, uint8_t class_id);

/// Mirrors one class top-to-bottom about the horizontal centerline of its
/// bounding box. Mirrored pixels overwrite what they land on; vacated source
/// pixels become background. Throws DataError("class not present") when the
/// class is absent.
LabelMask flip_class(const LabelMask& mask, uint8_t class_id);

/// One 3x3 dilation of a single class that claims background pixels only.
LabelMask good_dilate(const LabelMask& mask, uint8_t class_id);

/// One 3x3 erosion of a single class. Throws
/// DataError("erosion too destructive") when more than half the class's
/// pixels would vanish.
LabelMask good_erode(const LabelMask& mask, uint8_t class_id);

struct VariantOptions {
  /// Appendix-style flip of a random present class instead of the head.
  bool flip_random_class = false;
};

/// Expands one phantom into 1 + n_good + n_poor labeled samples sharing the
/// unmodified image: the original mask, then good touch-ups alternating
/// dilate/erode over distinct (kind, class) picks that keep per-class Dice at
/// 0.8 or better, then poor variants cycling through the five alteration
/// pipelines starting at a seed-dependent offset. Deterministic in seed.
std::vector<Sample> make_variant_set(const PhantomSample& sample, uint64_t seed,
                                     int n_good, int n_poor,
                                     const VariantOptions& options = {});

}  // namespace fusqa
