#include "degrade.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "errors.hpp"
#include "morphology.hpp"
#include "rng.hpp"

namespace fusqa {

namespace {

// Contested-pixel priority for over_dilate, strongest first.
constexpr std::array<uint8_t, 4> kDilatePriority = {kHead, kBody, kPalate, kGap};

void require_foreground_class(uint8_t class_id) {
  if (class_id < 1 || class_id >= kNumClasses) {
    throw UsageError("class id must be a foreground class in {1..4}");
  }
}

}  // namespace

bool is_good_kind(const DegradeKind& kind) {
  using Op = DegradeKind::Op;
  return kind.op == Op::Original || kind.op == Op::GoodDilate ||
         kind.op == Op::GoodErode;
}

std::string to_string(const DegradeKind& kind) {
  using Op = DegradeKind::Op;
  switch (kind.op) {
    case Op::Original: return "original";
    case Op::OverDilate: return "over_dilate(" + std::to_string(kind.iterations) + ")";
    case Op::OverErode: return "over_erode(" + std::to_string(kind.iterations) + ")";
    case Op::WrongClassPalateToHead: return "wrong_class_palate_to_head";
    case Op::DeleteClass: return "delete_class(" + std::to_string(kind.class_id) + ")";
    case Op::FlipClass: return "flip_class(" + std::to_string(kind.class_id) + ")";
    case Op::GoodDilate: return "good_dilate(" + std::to_string(kind.class_id) + ")";
    case Op::GoodErode: return "good_erode(" + std::to_string(kind.class_id) + ")";
  }
  throw UsageError("unknown degrade kind");
}

DegradeKind parse_degrade_kind(const std::string& text) {
  using Op = DegradeKind::Op;
  if (text == "original") return {Op::Original, 0, -1};
  if (text == "wrong_class_palate_to_head") return {Op::WrongClassPalateToHead, 0, -1};
  auto open = text.find('(');
  if (open != std::string::npos && text.back() == ')') {
    std::string name = text.substr(0, open);
    std::string arg = text.substr(open + 1, text.size() - open - 2);
    int value = 0;
    try {
      size_t used = 0;
      value = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw DataError("unknown provenance: " + text);
    }
    if (name == "over_dilate") return {Op::OverDilate, value, -1};
    if (name == "over_erode") return {Op::OverErode, value, -1};
    if (name == "delete_class") return {Op::DeleteClass, 0, value};
    if (name == "flip_class") return {Op::FlipClass, 0, value};
    if (name == "good_dilate") return {Op::GoodDilate, 0, value};
    if (name == "good_erode") return {Op::GoodErode, 0, value};
  }
  throw DataError("unknown provenance: " + text);
}

LabelMask over_dilate(const LabelMask& mask, int iterations) {
  mask.validate();
  if (iterations < 2) throw UsageError("over_dilate requires iterations >= 2");
  LabelMask out = mask;
  std::fill(out.labels.begin(), out.labels.end(), kBackground);
  for (uint8_t class_id : kDilatePriority) {
    PixelSet grown = dilate(binary_of_class(mask, class_id), mask.width,
                            mask.height, iterations);
    for (const Pixel& p : grown.points()) {
      uint8_t& cell = out.at(p.row, p.col);
      if (cell == kBackground) cell = class_id;
    }
  }
  return out;
}

LabelMask over_erode(const LabelMask& mask, int iterations) {
  mask.validate();
  if (iterations < 2) throw UsageError("over_erode requires iterations >= 2");
  LabelMask out = mask;
  std::fill(out.labels.begin(), out.labels.end(), kBackground);
  for (uint8_t class_id = 1; class_id < kNumClasses; ++class_id) {
    PixelSet kept = erode(binary_of_class(mask, class_id), mask.width,
                          mask.height, iterations);
    for (const Pixel& p : kept.points()) out.at(p.row, p.col) = class_id;
  }
  return out;
}

LabelMask wrong_class_palate_to_head(const LabelMask& mask) {
  mask.validate();
  LabelMask out = mask;
  for (uint8_t& v : out.labels) {
    if (v == kPalate) v = kHead;
  }
  return out;
}

LabelMask delete_class(const LabelMask& mask, uint8_t class_id) {
  mask.validate();
  require_foreground_class(class_id);
  LabelMask out = mask;
  for (uint8_t& v : out.labels) {
    if (v == class_id) v = kBackground;
  }
  return out;
}

LabelMask flip_class(const LabelMask& mask, uint8_t class_id) {
  mask.validate();
  require_foreground_class(class_id);
  int r_lo = mask.height, r_hi = -1;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c) == class_id) {
        r_lo = std::min(r_lo, r);
        r_hi = std::max(r_hi, r);
      }
    }
  }
  if (r_hi < 0) throw DataError("class not present");
  LabelMask out = mask;
  for (uint8_t& v : out.labels) {
    if (v == class_id) v = kBackground;
  }
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c) == class_id) out.at(r_lo + r_hi - r, c) = class_id;
    }
  }
  return out;
}

LabelMask good_dilate(const LabelMask& mask, uint8_t class_id) {
  mask.validate();
  require_foreground_class(class_id);
  PixelSet support = binary_of_class(mask, class_id);
  if (support.empty()) throw DataError("class not present");
  PixelSet grown = dilate(support, mask.width, mask.height, 1);
  LabelMask out = mask;
  for (const Pixel& p : grown.points()) {
    uint8_t& cell = out.at(p.row, p.col);
    if (cell == kBackground) cell = class_id;
  }
  return out;
}

LabelMask good_erode(const LabelMask& mask, uint8_t class_id) {
  mask.validate();
  require_foreground_class(class_id);
  PixelSet support = binary_of_class(mask, class_id);
  if (support.empty()) throw DataError("class not present");
  PixelSet kept = erode(support, mask.width, mask.height, 1);
  int64_t removed = static_cast<int64_t>(support.size()) -
                    static_cast<int64_t>(kept.size());
  if (2 * removed > static_cast<int64_t>(support.size())) {
    throw DataError("erosion too destructive");
  }
  LabelMask out = mask;
  for (const Pixel& p : support.points()) out.at(p.row, p.col) = kBackground;
  for (const Pixel& p : kept.points()) out.at(p.row, p.col) = class_id;
  return out;
}

namespace {

// Exact integer test for Dice(original, candidate) >= 0.8 on one class:
// 2I/(SA+SB) >= 4/5  <=>  5I >= 2(SA+SB). Both-empty counts as perfect.
bool dice_at_least_08(const LabelMask& a, const LabelMask& b, uint8_t class_id) {
  int64_t sa = 0, sb = 0, inter = 0;
  for (size_t i = 0; i < a.labels.size(); ++i) {
    bool in_a = a.labels[i] == class_id;
    bool in_b = b.labels[i] == class_id;
    sa += in_a;
    sb += in_b;
    inter += in_a && in_b;
  }
  if (sa + sb == 0) return true;
  return 5 * inter >= 2 * (sa + sb);
}

std::vector<uint8_t> present_classes(const LabelMask& mask) {
  std::array<bool, kNumClasses> seen = {};
  for (uint8_t v : mask.labels) seen[v] = true;
  std::vector<uint8_t> out;
  for (uint8_t c = 1; c < kNumClasses; ++c) {
    if (seen[c]) out.push_back(c);
  }
  return out;
}

int draw_over_iterations(const LabelMask& mask, Rng& rng) {
  int s = std::min(mask.width, mask.height);
  int lo = std::max<int>(2, std::lround(0.05 * s));
  int hi = std::max<int>(lo, std::lround(0.10 * s));
  return rng.uniform_int(lo, hi);
}

Sample variant_from(const PhantomSample& src, std::string id_suffix,
                    LabelMask mask, DegradeKind kind) {
  Sample s;
  s.id = src.id + "-" + std::move(id_suffix);
  s.source_id = src.id;
  s.image = src.image;
  s.mask = std::move(mask);
  s.quality = is_good_kind(kind) ? 1 : 0;
  s.provenance = kind;
  s.true_crl_mm = src.true_crl_mm;
  s.true_ga_days = src.true_ga_days;
  s.domain = src.params.domain;
  s.seed = src.seed;
  return s;
}

}  // namespace

std::vector<Sample> make_variant_set(const PhantomSample& sample, uint64_t seed,
                                     int n_good, int n_poor,
                                     const VariantOptions& options) {
  using Op = DegradeKind::Op;
  if (n_good < 1 || n_poor < 1) {
    throw UsageError("make_variant_set requires n_good >= 1 and n_poor >= 1");
  }
  sample.mask.validate();
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(static_cast<size_t>(1 + n_good + n_poor));
  out.push_back(variant_from(sample, "orig", sample.mask, {Op::Original, 0, -1}));

  // Good touch-ups: slots prefer dilate/erode alternately; per slot, scan the
  // classes in a seeded random order and take the first that is new as a
  // (kind, class) pair, survives the operation, and keeps Dice >= 0.8. Thin
  // classes rarely tolerate erosion, so a slot whose preferred op has no
  // qualifying class falls back to the other op before giving up.
  std::vector<DegradeKind> used;
  for (int k = 0; k < n_good; ++k) {
    Op preferred = (k % 2 == 0) ? Op::GoodDilate : Op::GoodErode;
    Op fallback = (preferred == Op::GoodDilate) ? Op::GoodErode : Op::GoodDilate;
    std::vector<uint8_t> order = {kBody, kHead, kGap, kPalate};
    rng.shuffle(order);
    bool placed = false;
    std::string last_error = "no qualifying class for good variant";
    for (Op op : {preferred, fallback}) {
      for (uint8_t class_id : order) {
        DegradeKind kind{op, 0, class_id};
        if (std::find(used.begin(), used.end(), kind) != used.end()) continue;
        LabelMask candidate;
        try {
          candidate = (op == Op::GoodDilate) ? good_dilate(sample.mask, class_id)
                                             : good_erode(sample.mask, class_id);
        } catch (const DataError& e) {
          last_error = e.what();
          continue;
        }
        if (!dice_at_least_08(sample.mask, candidate, class_id)) continue;
        out.push_back(variant_from(sample, "good" + std::to_string(k + 1),
                                   std::move(candidate), kind));
        used.push_back(kind);
        placed = true;
        break;
      }
      if (placed) break;
    }
    if (!placed) throw DataError(last_error);
  }

  // Poor variants: cycle through the five pipelines from a seed-dependent
  // offset so short runs still vary across samples.
  uint64_t offset = rng.below(5);
  for (int j = 0; j < n_poor; ++j) {
    int pipeline = static_cast<int>((offset + static_cast<uint64_t>(j)) % 5);
    std::string suffix = "poor" + std::to_string(j + 1);
    bool placed = false;
    std::string last_error = "poor variant generation failed";
    for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
      try {
        LabelMask candidate;
        DegradeKind kind{Op::Original, 0, -1};
        switch (pipeline) {
          case 0: {
            int iters = draw_over_iterations(sample.mask, rng);
            candidate = over_dilate(sample.mask, iters);
            kind = {Op::OverDilate, iters, -1};
            break;
          }
          case 1: {
            int iters = draw_over_iterations(sample.mask, rng);
            candidate = over_erode(sample.mask, iters);
            kind = {Op::OverErode, iters, -1};
            break;
          }
          case 2:
            candidate = wrong_class_palate_to_head(sample.mask);
            kind = {Op::WrongClassPalateToHead, 0, -1};
            break;
          case 3: {
            uint8_t class_id = static_cast<uint8_t>(rng.uniform_int(1, 4));
            candidate = delete_class(sample.mask, class_id);
            kind = {Op::DeleteClass, 0, class_id};
            break;
          }
          case 4: {
            uint8_t class_id = kHead;
            if (options.flip_random_class) {
              std::vector<uint8_t> pool = present_classes(sample.mask);
              if (pool.empty()) throw DataError("class not present");
              class_id = pool[rng.below(pool.size())];
            }
            candidate = flip_class(sample.mask, class_id);
            kind = {Op::FlipClass, 0, class_id};
            break;
          }
        }
        // A poor mask identical to the original would be mislabeled training
        // data (possible e.g. when flipping a symmetric class); resample.
        if (candidate.labels == sample.mask.labels) {
          throw DataError("degenerate poor variant");
        }
        out.push_back(variant_from(sample, suffix, std::move(candidate), kind));
        placed = true;
      } catch (const DataError& e) {
        last_error = e.what();
      }
    }
    if (!placed) throw DataError(last_error);
  }
  return out;
}

}  // namespace fusqa
