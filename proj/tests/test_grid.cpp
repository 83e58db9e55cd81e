#include <limits>

#include "doctest.h"
#include "grid.hpp"
#include "helpers.hpp"

using namespace fusqa;

TEST_CASE("pixel set sorts and deduplicates") {
  PixelSet s(std::vector<Pixel>{{3, 1}, {0, 2}, {3, 1}, {0, 1}});
  REQUIRE(s.size() == 3);
  CHECK(s.points()[0] == Pixel{0, 1});
  CHECK(s.points()[1] == Pixel{0, 2});
  CHECK(s.points()[2] == Pixel{3, 1});
  CHECK(s.contains({3, 1}));
  CHECK(!s.contains({1, 1}));
}

TEST_CASE("gray image validation") {
  GrayImage ok(8, 8, 1.0, 0.5f);
  CHECK_NOTHROW(ok.validate());

  GrayImage small(4, 8, 1.0, 0.5f);
  CHECK_THROWS_AS(small.validate(), DataError);

  GrayImage range(8, 8, 1.0, 0.5f);
  range.at(0, 0) = 1.5f;
  CHECK_THROWS_AS(range.validate(), DataError);
  range.at(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(range.validate(), DataError);

  GrayImage spacing(8, 8, 0.0, 0.5f);
  CHECK_THROWS_AS(spacing.validate(), DataError);
}

TEST_CASE("label mask validation and counts") {
  LabelMask mask(8, 8, 1.0);
  mask.at(1, 1) = kBody;
  mask.at(1, 2) = kHead;
  mask.at(2, 1) = kHead;
  CHECK_NOTHROW(mask.validate());
  auto counts = mask.class_counts();
  CHECK(counts[kBackground] == 61);
  CHECK(counts[kBody] == 1);
  CHECK(counts[kHead] == 2);
  CHECK(counts[kGap] == 0);

  mask.at(0, 0) = 5;
  CHECK_THROWS_AS(mask.validate(), DataError);
}

TEST_CASE("binary_of_class returns exactly the matching pixels") {
  LabelMask empty(8, 8, 1.0);
  CHECK(binary_of_class(empty, kGap).empty());

  LabelMask full(5, 5, 1.0, kHead);
  CHECK(binary_of_class(full, kHead).size() == 25);
  CHECK(binary_of_class(full, kBody).empty());

  CHECK_THROWS_AS(binary_of_class(full, 7), UsageError);
}

TEST_CASE("dice overlap") {
  auto a = testutil::mask_from_rows({"000", "011", "011"});
  auto b = testutil::mask_from_rows({"000", "011", "000"});
  CHECK(dice(a, a, kBody) == 1.0);
  CHECK(dice(a, b, kBody) == doctest::Approx(2.0 * 2 / (4 + 2)));
  CHECK(dice(a, b, kHead) == 1.0);  // both empty
  auto c = testutil::mask_from_rows({"110", "100", "000"});
  CHECK(dice(b, c, kBody) == 0.0);

  LabelMask other(4, 4, 1.0);
  CHECK_THROWS_AS(dice(a, other, kBody), DataError);
}
