#include <filesystem>
#include <fstream>

#include "dataset.hpp"
#include "degrade.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "phantom.hpp"

using namespace fusqa;
namespace fs = std::filesystem;

TEST_CASE("phantom dataset roundtrip is bit-exact") {
  auto dir = testutil::tmp_dir("ds_phantom");
  auto samples = generate_phantoms(100, 10, PhantomConfig{});
  write_dataset(samples, dir);
  auto back = read_dataset(dir);
  REQUIRE(back.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) CHECK(back[i] == samples[i]);

  // One image and one mask per sample, plus the manifest.
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 2 * samples.size() + 1);
}

TEST_CASE("degraded sample roundtrip keeps labels and provenance") {
  auto dir = testutil::tmp_dir("ds_samples");
  auto phantom = generate_phantom(5, PhantomParams{});
  phantom.id = "A00000";
  auto variants = make_variant_set(phantom, 42, 2, 3);
  write_samples(variants, dir);
  auto back = read_samples(dir);
  REQUIRE(back.size() == variants.size());
  for (size_t i = 0; i < variants.size(); ++i) CHECK(back[i] == variants[i]);
}

TEST_CASE("phantom manifests load as all-good samples") {
  auto dir = testutil::tmp_dir("ds_asgood");
  auto samples = generate_phantoms(200, 3, PhantomConfig{});
  write_dataset(samples, dir);
  auto loaded = read_samples(dir);
  REQUIRE(loaded.size() == 3);
  for (const auto& s : loaded) {
    CHECK(s.quality == 1);
    CHECK(s.provenance == DegradeKind{});
    CHECK(s.source_id == s.id);
  }
}

TEST_CASE("missing mask file fails naming the path") {
  auto dir = testutil::tmp_dir("ds_missing");
  auto samples = generate_phantoms(300, 2, PhantomConfig{});
  write_dataset(samples, dir);
  auto victim = dir / (samples[1].id + "_mask.pgm");
  fs::remove(victim);
  CHECK_THROWS_WITH_AS(read_dataset(dir), doctest::Contains("_mask.pgm"),
                       DataError);
}

TEST_CASE("manifest validation errors") {
  auto dir = testutil::tmp_dir("ds_manifest");

  CHECK_THROWS_WITH_AS(read_dataset(dir / "absent"),
                       doctest::Contains("manifest"), DataError);

  std::ofstream(dir / "manifest.json") << "{ not json";
  CHECK_THROWS_WITH_AS(read_dataset(dir), doctest::Contains("parse"), DataError);

  std::ofstream(dir / "manifest.json") << "{\"other\": 1}";
  CHECK_THROWS_WITH_AS(read_dataset(dir), doctest::Contains("samples"), DataError);
}

TEST_CASE("duplicate ids are rejected on write") {
  auto dir = testutil::tmp_dir("ds_dup");
  auto a = generate_phantom(5, PhantomParams{});
  a.id = "X00001";
  auto samples = std::vector<PhantomSample>{a, a};
  CHECK_THROWS_AS(write_dataset(samples, dir), UsageError);
}
