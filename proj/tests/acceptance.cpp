// Acceptance gate: one pass/fail line per release criterion, nonzero exit if
// any fails. Criteria 6-8 share one full benchmark run (seed 42, default
// config); criterion 9 reruns it and compares serialized bodies byte for byte.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "benchmark.hpp"
#include "biometry.hpp"
#include "cae.hpp"
#include "degrade.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "morphology.hpp"
#include "nn.hpp"
#include "phantom.hpp"
#include "qa.hpp"
#include "rng.hpp"

using namespace fusqa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

int count_class(const LabelMask& mask, uint8_t class_id) {
  return static_cast<int>(
      std::count(mask.labels.begin(), mask.labels.end(), class_id));
}

bool subset_of(const PixelSet& inner, const PixelSet& outer) {
  for (const Pixel& p : inner.points()) {
    if (!outer.contains(p)) return false;
  }
  return true;
}

// --- 1. gradient check ------------------------------------------------------

bool criterion_gradcheck(std::string& detail) {
  using nn::LayerSpec;
  auto t0 = Clock::now();
  const double h = 1e-5;
  double max_rel = 0.0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto net = nn::make_network<double>(
        {LayerSpec::conv(3, 4), LayerSpec::relu(), LayerSpec::maxpool(),
         LayerSpec::conv(4, 6), LayerSpec::relu(), LayerSpec::maxpool(),
         LayerSpec::fc(24, 1), LayerSpec::sigmoid()},
        seed);
    Rng rng(seed, 77);
    auto x = nn::Tensor<double>::zeros({3, 8, 8});
    for (double& v : x.data) v = rng.normal();
    const int y = static_cast<int>(seed % 2);

    nn::ForwardCache<double> cache;
    const double p = nn::forward(net, x, &cache).data[0];
    auto up = nn::Tensor<double>::zeros({1});
    up.data[0] = nn::bce_grad(p, y);
    auto grads = nn::backward(net, cache, up);

    auto loss_now = [&] { return nn::bce_loss(nn::forward(net, x).data[0], y); };
    for (size_t li = 0; li < net.layers.size(); ++li) {
      auto sweep = [&](nn::Tensor<double>& w, const nn::Tensor<double>& gw) {
        for (size_t j = 0; j < w.data.size(); ++j) {
          const double keep = w.data[j];
          w.data[j] = keep + h;
          const double lp = loss_now();
          w.data[j] = keep - h;
          const double lm = loss_now();
          w.data[j] = keep;
          const double numeric = (lp - lm) / (2.0 * h);
          const double analytic = gw.data[j];
          const double rel = std::abs(analytic - numeric) /
                             std::max({std::abs(analytic), std::abs(numeric), 1e-6});
          max_rel = std::max(max_rel, rel);
        }
      };
      sweep(net.layers[li].w, grads.layers[li].w);
      sweep(net.layers[li].b, grads.layers[li].b);
    }
  }
  const double secs = seconds_since(t0);
  detail = fmt("gradient check: max rel err %.3e (limit 1e-4), %.1fs (limit 60s)",
               max_rel, secs);
  return max_rel < 1e-4 && secs < 60.0;
}

// --- 2. farthest-pair oracle -------------------------------------------------

bool criterion_calipers(std::string& detail) {
  auto t0 = Clock::now();
  Rng rng(4242);
  int trials = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng.below(299));    // 2..300 points
    const int side = 16 + static_cast<int>(rng.below(485)); // 16..500 grid
    std::vector<Pixel> pts(static_cast<size_t>(n));
    for (Pixel& p : pts) {
      p = {static_cast<int>(rng.below(static_cast<uint64_t>(side))),
           static_cast<int>(rng.below(static_cast<uint64_t>(side)))};
    }
    PixelSet set(std::move(pts));
    if (set.size() < 2) continue;  // all draws collided; skip the degenerate set
    ++trials;

    // Exhaustive oracle with the library's tie-break: smallest (p1, p2).
    const auto& q = set.points();
    int64_t best_sq = -1;
    Pixel b1{}, b2{};
    for (size_t i = 0; i < q.size(); ++i) {
      for (size_t j = i + 1; j < q.size(); ++j) {
        Pixel a = q[i], b = q[j];
        if (b < a) std::swap(a, b);
        const int64_t dr = a.row - b.row, dc = a.col - b.col;
        const int64_t sq = dr * dr + dc * dc;
        if (sq > best_sq || (sq == best_sq && (a < b1 || (a == b1 && b < b2)))) {
          best_sq = sq;
          b1 = a;
          b2 = b;
        }
      }
    }

    const DiameterResult r = max_pairwise_distance(set);
    if (!(r.p1 == b1) || !(r.p2 == b2) ||
        r.dist_px != std::sqrt(static_cast<double>(best_sq))) {
      detail = fmt("farthest-pair oracle: mismatch on trial %d (n=%zu)", t, q.size());
      return false;
    }
  }
  const double secs = seconds_since(t0);
  detail = fmt("farthest-pair oracle: %d random sets match exhaustive search, "
               "%.1fs (limit 60s)",
               trials, secs);
  return secs < 60.0;
}

// --- 3. morphology contracts --------------------------------------------------

bool criterion_morphology(std::string& detail) {
  // Footprint examples, exact.
  std::vector<Pixel> block;
  for (int r = 2; r <= 6; ++r) {
    for (int c = 2; c <= 6; ++c) block.push_back({r, c});
  }
  const PixelSet five(block);
  if (outer_contour(five, 9, 9).size() != 24) {
    detail = "morphology contracts: 5x5 block ring != 24 pixels";
    return false;
  }
  if (!dilate(PixelSet{}, 9, 9, 1).empty() || !erode(PixelSet{}, 9, 9, 1).empty() ||
      !outer_contour(PixelSet{}, 9, 9).empty()) {
    detail = "morphology contracts: empty set not preserved";
    return false;
  }
  const PixelSet center(std::vector<Pixel>{{4, 4}});
  const PixelSet corner(std::vector<Pixel>{{0, 0}});
  if (outer_contour(center, 9, 9).size() != 8 ||
      outer_contour(corner, 9, 9).size() != 3) {
    detail = "morphology contracts: singleton neighborhood footprints wrong";
    return false;
  }
  const PixelSet near_border(std::vector<Pixel>{{2, 2}});
  if (!(erode(dilate(near_border, 9, 9, 1), 9, 9, 1) == near_border)) {
    detail = "morphology contracts: erode(dilate(singleton)) != singleton";
    return false;
  }

  // Monotonicity and contour identities on seeded random sets.
  Rng rng(99);
  for (int t = 0; t < 40; ++t) {
    std::vector<Pixel> pts;
    const int n = 1 + static_cast<int>(rng.below(140));
    for (int i = 0; i < n; ++i) {
      pts.push_back({static_cast<int>(rng.below(24)), static_cast<int>(rng.below(24))});
    }
    const PixelSet set(std::move(pts));
    for (int k = 1; k <= 3; ++k) {
      if (!subset_of(set, dilate(set, 24, 24, k)) ||
          !subset_of(erode(set, 24, 24, k), set)) {
        detail = fmt("morphology contracts: monotonicity failed (trial %d, k=%d)", t, k);
        return false;
      }
    }
    const PixelSet ring = outer_contour(set, 24, 24);
    std::vector<Pixel> merged = set.points();
    merged.insert(merged.end(), ring.points().begin(), ring.points().end());
    for (const Pixel& p : ring.points()) {
      if (set.contains(p)) {
        detail = fmt("morphology contracts: contour overlaps its set (trial %d)", t);
        return false;
      }
    }
    if (!(PixelSet(std::move(merged)) == dilate(set, 24, 24, 1))) {
      detail = fmt("morphology contracts: contour + set != 1-step dilation (trial %d)", t);
      return false;
    }
  }
  detail = "morphology contracts: footprints, monotonicity and contour identities exact";
  return true;
}

// --- 4. dating formula ---------------------------------------------------------

bool criterion_dating(std::string& detail) {
  const struct { double crl, ga; } anchors[] = {
      {15.0, 58.59}, {50.0, 81.09}, {80.0, 97.58}};
  for (const auto& a : anchors) {
    const double got = ga_from_crl(a.crl);
    if (std::abs(got - a.ga) > 0.01) {
      detail = fmt("dating formula: ga(%.0f mm) = %.4f days, want %.2f +- 0.01",
                   a.crl, got, a.ga);
      return false;
    }
  }
  double prev = ga_from_crl(15.0);
  for (int i = 1; i <= 800; ++i) {
    const double ga = ga_from_crl(15.0 + 0.1 * i);
    if (!(ga > prev)) {
      detail = fmt("dating formula: not strictly increasing at %.1f mm", 15.0 + 0.1 * i);
      return false;
    }
    prev = ga;
  }
  detail = "dating formula: anchors within 0.01 days, strictly increasing on [15,95] mm";
  return true;
}

// --- 5. degradation postconditions ---------------------------------------------

bool criterion_degradations(std::vector<std::vector<Sample>>& keep,
                            std::string& detail) {
  using Op = DegradeKind::Op;
  keep.clear();
  keep.reserve(100);
  for (uint64_t i = 0; i < 100; ++i) {
    const PhantomSample s = generate_phantom(i, draw_params(i, PhantomConfig{}));
    std::vector<Sample> variants = make_variant_set(s, i, 4, 5);
    if (variants.size() != 10) {
      detail = fmt("degradation postconditions: phantom %llu yielded %zu variants",
                   static_cast<unsigned long long>(i), variants.size());
      return false;
    }
    for (const Sample& v : variants) {
      if (!(v.image == s.image)) {
        detail = fmt("degradation postconditions: image modified (%s)", v.id.c_str());
        return false;
      }
      if (is_good_kind(v.provenance)) {
        for (int c = 1; c < kNumClasses; ++c) {
          if (dice(s.mask, v.mask, c) < 0.8) {
            detail = fmt("degradation postconditions: good variant %s class %d "
                         "Dice %.3f < 0.8",
                         v.id.c_str(), c, dice(s.mask, v.mask, c));
            return false;
          }
        }
      }
      switch (v.provenance.op) {
        case Op::DeleteClass:
          if (count_class(v.mask, static_cast<uint8_t>(v.provenance.class_id)) != 0) {
            detail = fmt("degradation postconditions: %s kept deleted class",
                         v.id.c_str());
            return false;
          }
          break;
        case Op::WrongClassPalateToHead:
          if (count_class(v.mask, kPalate) != 0 ||
              count_class(v.mask, kHead) !=
                  count_class(s.mask, kHead) + count_class(s.mask, kPalate)) {
            detail = fmt("degradation postconditions: %s relabel counts off",
                         v.id.c_str());
            return false;
          }
          break;
        case Op::OverErode:
          for (int c = 1; c < kNumClasses; ++c) {
            if (count_class(v.mask, static_cast<uint8_t>(c)) >
                count_class(s.mask, static_cast<uint8_t>(c))) {
              detail = fmt("degradation postconditions: %s grew class %d",
                           v.id.c_str(), c);
              return false;
            }
          }
          break;
        default:
          break;
      }
    }
    keep.push_back(std::move(variants));
  }
  detail = "degradation postconditions: 100 phantoms x 10 variants all hold";
  return true;
}

// --- 6-8. benchmark-derived criteria --------------------------------------------

struct BenchNumbers {
  double acc_single = 0, f1_single = 0, acc_siamese = 0, acc_synergic = 0;
  double acc_cae = 0;
  bool f1_single_defined = false;
  bool cae_row_complete = false;
  bool good_defined = false, poor_defined = false;
  double ga_good = 0, ga_poor = 0;
};

BenchNumbers extract(const nlohmann::json& body) {
  BenchNumbers n;
  const auto& models = body.at("models");
  n.acc_single = models.at("single").at("metrics").at("accuracy").get<double>();
  n.f1_single = models.at("single").at("metrics").at("f1").get<double>();
  n.f1_single_defined = models.at("single").at("metrics").at("f1_defined").get<bool>();
  n.acc_siamese = models.at("siamese").at("metrics").at("accuracy").get<double>();
  n.acc_synergic = models.at("synergic").at("metrics").at("accuracy").get<double>();
  if (models.contains("cae")) {
    const auto& m = models.at("cae");
    n.acc_cae = m.at("metrics").at("accuracy").get<double>();
    n.cae_row_complete = m.contains("counts") && m.at("metrics").contains("precision") &&
                         m.at("metrics").contains("recall") &&
                         m.at("metrics").contains("f1");
  }
  const auto& good = body.at("downstream").at("good");
  const auto& poor = body.at("downstream").at("poor");
  n.good_defined = !good.at("ga_err_days").is_null();
  n.poor_defined = !poor.at("ga_err_days").is_null();
  if (n.good_defined) n.ga_good = good.at("ga_err_days").get<double>();
  if (n.poor_defined) n.ga_poor = poor.at("ga_err_days").get<double>();
  return n;
}

}  // namespace

int main() {
  int failed = 0;
  auto report_line = [&](int index, bool ok, const std::string& detail) {
    std::printf("%s  %d. %s\n", ok ? "PASS" : "FAIL", index, detail.c_str());
    if (!ok) ++failed;
    std::fflush(stdout);
  };
  auto guarded = [&](int index, auto&& fn) {
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = fmt("unexpected error: %s", e.what());
    }
    report_line(index, ok, detail);
    return ok;
  };

  guarded(1, [](std::string& d) { return criterion_gradcheck(d); });
  guarded(2, [](std::string& d) { return criterion_calipers(d); });
  guarded(3, [](std::string& d) { return criterion_morphology(d); });
  guarded(4, [](std::string& d) { return criterion_dating(d); });

  std::vector<std::vector<Sample>> first_variants;
  guarded(5, [&](std::string& d) { return criterion_degradations(first_variants, d); });

  // One full benchmark run feeds criteria 6-8.
  const BenchConfig config;
  nlohmann::json body1;
  double bench_secs = 0.0;
  bool bench_ok = false;
  {
    std::string detail;
    try {
      auto t0 = Clock::now();
      body1 = run_benchmark(config, 42).body;
      bench_secs = seconds_since(t0);
      const BenchNumbers n = extract(body1);

      const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
      const double budget = 900.0 * 4.0 / std::min(4u, hw);
      const bool thresholds = n.acc_single >= 0.85 && n.f1_single_defined &&
                              n.f1_single >= 0.85 &&
                              n.acc_single >= n.acc_siamese - 0.05 &&
                              n.acc_single >= n.acc_synergic - 0.05;
      bench_ok = thresholds && bench_secs < budget;
      detail = fmt("benchmark seed 42: single acc %.3f / f1 %.3f (floor 0.85), "
                   "siamese acc %.3f, synergic acc %.3f (single >= each - 0.05), "
                   "%.0fs (budget %.0fs at %u threads)",
                   n.acc_single, n.f1_single, n.acc_siamese, n.acc_synergic,
                   bench_secs, budget, hw);
    } catch (const std::exception& e) {
      detail = fmt("benchmark seed 42: unexpected error: %s", e.what());
    }
    report_line(6, bench_ok, detail);
  }

  guarded(7, [&](std::string& d) {
    if (body1.is_null()) {
      d = "downstream gap: benchmark run unavailable";
      return false;
    }
    const BenchNumbers n = extract(body1);
    if (!n.good_defined || !n.poor_defined) {
      d = "downstream gap: a group has no measurable, datable sample";
      return false;
    }
    const bool ratio_ok = n.ga_good == 0.0 ? n.ga_poor > 0.0
                                           : n.ga_poor / n.ga_good >= 2.0;
    d = fmt("downstream gap: predicted-good GA err %.3f days vs poor %.3f "
            "(need poor >= 2x good)",
            n.ga_good, n.ga_poor);
    return n.ga_good < n.ga_poor && ratio_ok;
  });

  guarded(8, [&](std::string& d) {
    if (body1.is_null()) {
      d = "autoencoder baseline: benchmark run unavailable";
      return false;
    }
    const BenchNumbers n = extract(body1);
    d = fmt("autoencoder baseline: full metrics row %s, cae acc %.3f <= single acc %.3f",
            n.cae_row_complete ? "present" : "MISSING", n.acc_cae, n.acc_single);
    return n.cae_row_complete && n.acc_single >= n.acc_cae;
  });

  guarded(9, [&](std::string& d) {
    if (body1.is_null()) {
      d = "determinism: benchmark run unavailable";
      return false;
    }
    const nlohmann::json body2 = run_benchmark(config, 42).body;
    const bool bytes_equal = body1.dump() == body2.dump();

    bool variants_equal = first_variants.size() == 100;
    for (uint64_t i = 0; variants_equal && i < 100; ++i) {
      const PhantomSample s = generate_phantom(i, draw_params(i, PhantomConfig{}));
      variants_equal = make_variant_set(s, i, 4, 5) == first_variants[i];
    }

    // Checkpoint roundtrip: trained models must predict identically after
    // a save/load cycle.
    const auto dir = std::filesystem::temp_directory_path() / "fusqa_acceptance";
    std::filesystem::create_directories(dir);
    std::vector<Sample> ds;
    for (uint64_t i = 100; i < 106; ++i) {
      const PhantomSample s = generate_phantom(i, draw_params(i, PhantomConfig{}));
      for (Sample& v : make_variant_set(s, i, 1, 2)) ds.push_back(std::move(v));
    }
    TrainConfig tc;
    tc.epochs = 2;
    tc.threads = 1;
    const QaModel qa = train_qa(ds, Topology::Single, tc, 5).model;
    save_qa_model(qa, dir / "qa.fqm");
    const QaModel qa2 = load_qa_model(dir / "qa.fqm");
    bool roundtrip = true;
    for (const Sample& v : ds) {
      if (predict(qa, v.image, v.mask) != predict(qa2, v.image, v.mask)) {
        roundtrip = false;
        break;
      }
    }
    std::vector<LabelMask> good_masks;
    for (const Sample& v : ds) {
      if (v.quality == 1) good_masks.push_back(v.mask);
    }
    CaeConfig cc;
    cc.epochs = 2;
    cc.threads = 1;
    const CaeModel cae = train_cae(good_masks, cc, 9);
    save_cae_model(cae, dir / "cae.fqm");
    const CaeModel cae2 = load_cae_model(dir / "cae.fqm");
    for (const Sample& v : ds) {
      const CaeScore a = cae_score(cae, v.mask);
      const CaeScore b = cae_score(cae2, v.mask);
      if (a.ratio != b.ratio || a.good != b.good) {
        roundtrip = false;
        break;
      }
    }
    std::filesystem::remove_all(dir);

    d = fmt("determinism: report body bytes %s, variant sets %s, checkpoint "
            "roundtrip predictions %s",
            bytes_equal ? "identical" : "DIFFER",
            variants_equal ? "identical" : "DIFFER",
            roundtrip ? "identical" : "DIFFER");
    return bytes_equal && variants_equal && roundtrip;
  });

  std::printf("acceptance: %d/9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
