#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rng.hpp"

using fusqa::Rng;

TEST_CASE("rng is deterministic in its seed") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_differs = false;
  for (int i = 0; i < 100; ++i) {
    uint64_t va = a.next(), vb = b.next(), vc = c.next();
    all_equal &= (va == vb);
    any_differs |= (va != vc);
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("stream derivation decorrelates consumers") {
  Rng a(9, 1), b(9, 2), c(9, 1);
  CHECK(a.next() == c.next());
  CHECK(Rng(9, 1).next() != b.next());
  CHECK(fusqa::derive_seed(5, 0) != fusqa::derive_seed(5, 1));
  CHECK(fusqa::derive_seed(5, 3) == fusqa::derive_seed(5, 3));
}

TEST_CASE("uniform01 stays in [0,1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("below and uniform_int respect their bounds") {
  Rng rng(11);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 5000; ++i) {
    CHECK(rng.below(7) < 7);
    int v = rng.uniform_int(2, 5);
    CHECK(v >= 2);
    CHECK(v <= 5);
    saw_lo |= (v == 2);
    saw_hi |= (v == 5);
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK(rng.uniform_int(3, 3) == 3);
}

TEST_CASE("shuffle permutes") {
  Rng rng(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto shuffled = v;
  rng.shuffle(shuffled);
  CHECK(shuffled != v);  // 1/50! odds of a false failure
  auto sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == v);
}

TEST_CASE("normal draws are finite and reproducible") {
  Rng a(21), b(21);
  double mean = 0.0;
  for (int i = 0; i < 2000; ++i) {
    double v = a.normal();
    CHECK(std::isfinite(v));
    CHECK(v == b.normal());
    mean += v;
  }
  mean /= 2000.0;
  CHECK(std::abs(mean) < 0.1);
}
