#include <algorithm>
#include <cmath>

#include "biometry.hpp"
#include "degrade.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "phantom.hpp"

using namespace fusqa;

TEST_CASE("generation is deterministic in seed and params") {
  PhantomParams params;
  auto a = generate_phantom(7, params);
  auto b = generate_phantom(7, params);
  CHECK(a == b);
  auto c = generate_phantom(8, params);
  CHECK(a.image != c.image);

  auto batch1 = generate_phantoms(42, 4, PhantomConfig{});
  auto batch2 = generate_phantoms(42, 4, PhantomConfig{});
  CHECK(batch1 == batch2);
}

TEST_CASE("masks contain every foreground class with the palate inside the head") {
  auto samples = generate_phantoms(7, 20, PhantomConfig{});
  for (const auto& s : samples) {
    auto counts = s.mask.class_counts();
    for (int cls = kBody; cls <= kPalate; ++cls) CHECK(counts[cls] >= 1);

    // Every palate pixel must be surrounded by palate or head only.
    for (int r = 0; r < s.mask.height; ++r) {
      for (int c = 0; c < s.mask.width; ++c) {
        if (s.mask.at(r, c) != kPalate) continue;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            bool inside = r + dr >= 0 && r + dr < s.mask.height && c + dc >= 0 &&
                          c + dc < s.mask.width;
            REQUIRE(inside);
            uint8_t v = s.mask.at(r + dr, c + dc);
            CHECK((v == kPalate || v == kHead));
          }
        }
      }
    }
  }
}

TEST_CASE("true measurements are definitional and inside dating validity") {
  auto samples = generate_phantoms(1234, 100, PhantomConfig{});
  DatingModel dating;
  for (const auto& s : samples) {
    auto m = measure_crl(s.mask);
    CHECK(s.true_crl_mm == m.length_mm);
    CHECK(s.true_crl_mm >= dating.valid_lo_mm);
    CHECK(s.true_crl_mm <= dating.valid_hi_mm);
    CHECK(s.true_ga_days == ga_from_crl(s.true_crl_mm, dating));
  }
}

TEST_CASE("domain B changes rendering only") {
  PhantomConfig a_cfg, b_cfg;
  b_cfg.domain = 'B';
  auto a = generate_phantoms(99, 5, a_cfg);
  auto b = generate_phantoms(99, 5, b_cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mask == b[i].mask);
    CHECK(a[i].true_crl_mm == b[i].true_crl_mm);
    CHECK(a[i].image != b[i].image);
    CHECK(b[i].id[0] == 'B');
    CHECK(a[i].id[0] == 'A');
  }
}

TEST_CASE("noiseless rendering is piecewise constant at quantized class means") {
  PhantomParams params;
  params.speckle_strength = 0.0;
  params.blur_radius_px = 0;
  auto mask = rasterize_mask(params);
  auto image = render_image(mask, params, 5);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      double mean = params.class_intensity[mask.at(r, c)];
      float expect = static_cast<float>(std::lround(mean * 255.0) / 255.0);
      CHECK(image.at(r, c) == expect);
    }
  }
}

TEST_CASE("ids are zero-padded and sequential") {
  auto samples = generate_phantoms(7, 3, PhantomConfig{});
  CHECK(samples[0].id == "A00000");
  CHECK(samples[1].id == "A00001");
  CHECK(samples[2].id == "A00002");
}

TEST_CASE("oversized geometry fails as out of bounds") {
  PhantomParams params;
  params.body_axis_a_mm = 40.0;
  CHECK_THROWS_WITH_AS(rasterize_mask(params), "phantom out of bounds", DataError);

  PhantomConfig cfg;
  cfg.image_size = 16;  // default mm ranges cannot fit a 16 px grid
  CHECK_THROWS_WITH_AS(generate_phantoms(7, 1, cfg), "phantom out of bounds",
                       DataError);
}

TEST_CASE("phantom count must be non-negative") {
  CHECK_THROWS_AS(generate_phantoms(7, -1, PhantomConfig{}), UsageError);
  CHECK(generate_phantoms(7, 0, PhantomConfig{}).empty());
}

TEST_CASE("acquisition jitter varies rendering within stated bounds") {
  PhantomConfig cfg;
  bool speckle_varies = false, blur_varies = false, gain_varies = false;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    PhantomParams p = draw_params(seed, cfg);
    double lo = cfg.speckle_strength * (1.0 - cfg.speckle_jitter);
    double hi = cfg.speckle_strength * (1.0 + cfg.speckle_jitter);
    CHECK(p.speckle_strength >= lo);
    CHECK(p.speckle_strength <= hi);
    CHECK(p.blur_radius_px >= cfg.blur_radius_px);
    CHECK(p.blur_radius_px <= cfg.blur_radius_px + cfg.blur_jitter_px);

    // The gain offset is global: every class mean moves by the same amount
    // (up to the [0,1] clamp, which the default means never hit at |gain|<=0.1).
    double gain = p.class_intensity[0] - cfg.class_intensity[0];
    CHECK(std::abs(gain) <= cfg.gain_jitter + 1e-12);
    for (int cls = 0; cls < kNumClasses; ++cls) {
      double expect = std::clamp(cfg.class_intensity[cls] + gain, 0.0, 1.0);
      CHECK(p.class_intensity[cls] == doctest::Approx(expect).epsilon(1e-12));
    }
    speckle_varies |= p.speckle_strength != cfg.speckle_strength;
    blur_varies |= p.blur_radius_px != cfg.blur_radius_px;
    gain_varies |= gain != 0.0;
  }
  CHECK(speckle_varies);
  CHECK(blur_varies);
  CHECK(gain_varies);
}

TEST_CASE("palate sits off the head midline so a head flip is never a no-op") {
  auto samples = generate_phantoms(11, 20, PhantomConfig{});
  for (const auto& s : samples) {
    auto flipped = flip_class(s.mask, kHead);
    CHECK(flipped.labels != s.mask.labels);
  }
}
