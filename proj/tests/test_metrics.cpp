#include "doctest.h"
#include "errors.hpp"
#include "metrics.hpp"

using namespace fusqa;

TEST_CASE("metrics match hand-computed values on a skewed split") {
  Metrics m = compute_metrics({795, 205, 0, 0});
  CHECK(m.precision == doctest::Approx(0.795).epsilon(1e-12));
  CHECK(m.recall == 1.0);
  CHECK(m.accuracy == doctest::Approx(0.795).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 * 0.795 / 1.795).epsilon(1e-12));
  CHECK(m.precision_defined);
  CHECK(m.recall_defined);
  CHECK(m.f1_defined);
}

TEST_CASE("a perfect balanced classifier scores 1.0 across the board") {
  Metrics m = compute_metrics({50, 0, 50, 0});
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.accuracy == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("an always-poor classifier leaves precision and f1 undefined") {
  Metrics m = compute_metrics({0, 0, 10, 10});
  CHECK_FALSE(m.precision_defined);
  CHECK(m.precision == 0.0);
  CHECK(m.recall_defined);  // tp=0, fn=10: recall is a defined 0
  CHECK(m.recall == 0.0);
  CHECK(m.accuracy == 0.5);
  CHECK_FALSE(m.f1_defined);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("all-negative data leaves recall undefined too") {
  Metrics m = compute_metrics({0, 3, 7, 0});
  CHECK(m.precision_defined);
  CHECK(m.precision == 0.0);
  CHECK_FALSE(m.recall_defined);
  CHECK_FALSE(m.f1_defined);
  CHECK(m.accuracy == 0.7);
}

TEST_CASE("asymmetric errors keep precision and recall apart") {
  Metrics m = compute_metrics({30, 10, 50, 10});
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.75));
  CHECK(m.accuracy == doctest::Approx(0.8));
  CHECK(m.f1 == doctest::Approx(0.75));

  Metrics n = compute_metrics({30, 30, 30, 10});
  CHECK(n.precision == doctest::Approx(0.5));
  CHECK(n.recall == doctest::Approx(0.75));
  CHECK(n.f1 == doctest::Approx(0.6));
}

TEST_CASE("invalid counts are usage errors") {
  CHECK_THROWS_WITH_AS(compute_metrics({0, 0, 0, 0}),
                       "metrics require at least one sample", UsageError);
  CHECK_THROWS_WITH_AS(compute_metrics({-1, 2, 3, 4}),
                       "confusion counts must be non-negative", UsageError);
}
