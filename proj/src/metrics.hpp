#pragma once

#include <cstdint>

namespace fusqa {

/// Positive class = "good" mask.
struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }
};

/// Degenerate denominators fall back to 0 with the matching flag cleared so
/// reports can mark the convention.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

/// precision = tp/(tp+fp), recall = tp/(tp+fn), accuracy = (tp+tn)/total,
/// f1 = 2PR/(P+R). Throws UsageError when total = 0.
Metrics compute_metrics(const ConfusionCounts& counts);

}  // namespace fusqa
