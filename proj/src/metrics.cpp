#include "metrics.hpp"

#include "errors.hpp"

namespace fusqa {

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
    throw UsageError("confusion counts must be non-negative");
  }
  if (c.total() == 0) throw UsageError("metrics require at least one sample");
  Metrics m;
  if (c.tp + c.fp > 0) {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    m.precision_defined = false;
  }
  if (c.tp + c.fn > 0) {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    m.recall_defined = false;
  }
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_defined = false;
  }
  return m;
}

}  // namespace fusqa
