#include "dataset.hpp"

#include <fstream>
#include <set>
#include <string>

#include "errors.hpp"
#include "json.hpp"
#include "pgm.hpp"

namespace fusqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json params_to_json(const PhantomParams& p) {
  json j;
  j["image_size"] = p.image_size;
  j["spacing_mm"] = p.spacing_mm;
  j["head_axis_a_mm"] = p.head_axis_a_mm;
  j["head_axis_b_mm"] = p.head_axis_b_mm;
  j["body_axis_a_mm"] = p.body_axis_a_mm;
  j["body_axis_b_mm"] = p.body_axis_b_mm;
  j["gap_width_mm"] = p.gap_width_mm;
  j["palate_radius_mm"] = p.palate_radius_mm;
  j["pose_deg"] = p.pose_deg;
  j["class_intensity"] = p.class_intensity;
  j["speckle_strength"] = p.speckle_strength;
  j["blur_radius_px"] = p.blur_radius_px;
  j["domain"] = std::string(1, p.domain);
  return j;
}

PhantomParams params_from_json(const json& j) {
  PhantomParams p;
  p.image_size = j.at("image_size").get<int>();
  p.spacing_mm = j.at("spacing_mm").get<double>();
  p.head_axis_a_mm = j.at("head_axis_a_mm").get<double>();
  p.head_axis_b_mm = j.at("head_axis_b_mm").get<double>();
  p.body_axis_a_mm = j.at("body_axis_a_mm").get<double>();
  p.body_axis_b_mm = j.at("body_axis_b_mm").get<double>();
  p.gap_width_mm = j.at("gap_width_mm").get<double>();
  p.palate_radius_mm = j.at("palate_radius_mm").get<double>();
  p.pose_deg = j.at("pose_deg").get<double>();
  auto intensity = j.at("class_intensity").get<std::vector<double>>();
  if (intensity.size() != kNumClasses) {
    throw DataError("manifest params has wrong class_intensity length");
  }
  std::copy(intensity.begin(), intensity.end(), p.class_intensity.begin());
  p.speckle_strength = j.at("speckle_strength").get<double>();
  p.blur_radius_px = j.at("blur_radius_px").get<int>();
  auto domain = j.at("domain").get<std::string>();
  if (domain.size() != 1) throw DataError("manifest params has bad domain");
  p.domain = domain[0];
  return p;
}

void write_manifest(const json& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  if (!out.good()) throw DataError("cannot write " + path.string());
}

json read_manifest(const fs::path& dir) {
  fs::path path = dir / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("manifest parse error in " + path.string() + ": " + e.what());
  }
  if (!manifest.contains("samples") || !manifest["samples"].is_array()) {
    throw DataError("manifest has no samples array in " + path.string());
  }
  return manifest;
}

// Metadata shared by phantom and degraded entries.
struct EntryCore {
  std::string id;
  GrayImage image;
  LabelMask mask;
  double spacing_mm = 0.0;
  char domain = 'A';
  uint64_t seed = 0;
  double true_crl_mm = 0.0;
  double true_ga_days = 0.0;
};

json core_to_json(const std::string& id, double spacing, char domain,
                  uint64_t seed, double crl, double ga) {
  json j;
  j["id"] = id;
  j["image"] = id + "_img.pgm";
  j["mask"] = id + "_mask.pgm";
  j["spacing_mm"] = spacing;
  j["domain"] = std::string(1, domain);
  j["seed"] = seed;
  j["true_crl_mm"] = crl;
  j["true_ga_days"] = ga;
  return j;
}

EntryCore core_from_json(const json& entry, const fs::path& dir) {
  EntryCore core;
  try {
    core.id = entry.at("id").get<std::string>();
    core.spacing_mm = entry.at("spacing_mm").get<double>();
    auto domain = entry.at("domain").get<std::string>();
    if (domain.size() != 1) throw DataError("bad domain for sample " + core.id);
    core.domain = domain[0];
    core.seed = entry.at("seed").get<uint64_t>();
    core.true_crl_mm = entry.at("true_crl_mm").get<double>();
    core.true_ga_days = entry.at("true_ga_days").get<double>();
    core.image = read_pgm_image(dir / entry.at("image").get<std::string>(),
                                core.spacing_mm);
    core.mask = read_pgm_mask(dir / entry.at("mask").get<std::string>(),
                              core.spacing_mm);
  } catch (const json::exception& e) {
    throw DataError("manifest entry malformed: " + std::string(e.what()));
  }
  if (core.image.width != core.mask.width || core.image.height != core.mask.height) {
    throw DataError("image/mask size mismatch for sample " + core.id);
  }
  return core;
}

void write_pair(const fs::path& dir, const std::string& id,
                const GrayImage& image, const LabelMask& mask,
                std::set<std::string>& seen) {
  if (id.empty()) throw UsageError("sample id must be non-empty");
  if (!seen.insert(id).second) throw UsageError("duplicate sample id " + id);
  write_pgm(dir / (id + "_img.pgm"), image);
  write_pgm(dir / (id + "_mask.pgm"), mask);
}

}  // namespace

fs::path write_dataset(const std::vector<PhantomSample>& samples,
                       const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string());
  json entries = json::array();
  std::set<std::string> seen;
  for (const PhantomSample& s : samples) {
    write_pair(dir, s.id, s.image, s.mask, seen);
    json e = core_to_json(s.id, s.image.spacing_mm, s.params.domain, s.seed,
                          s.true_crl_mm, s.true_ga_days);
    e["params"] = params_to_json(s.params);
    entries.push_back(std::move(e));
  }
  json manifest;
  manifest["samples"] = std::move(entries);
  fs::path path = dir / "manifest.json";
  write_manifest(manifest, path);
  return path;
}

std::vector<PhantomSample> read_dataset(const fs::path& dir) {
  json manifest = read_manifest(dir);
  std::vector<PhantomSample> out;
  for (const json& entry : manifest["samples"]) {
    EntryCore core = core_from_json(entry, dir);
    PhantomSample s;
    s.id = core.id;
    s.image = std::move(core.image);
    s.mask = std::move(core.mask);
    s.true_crl_mm = core.true_crl_mm;
    s.true_ga_days = core.true_ga_days;
    s.seed = core.seed;
    if (entry.contains("params")) {
      try {
        s.params = params_from_json(entry["params"]);
      } catch (const json::exception& e) {
        throw DataError("manifest entry malformed: " + std::string(e.what()));
      }
    } else {
      s.params.image_size = s.mask.width;
      s.params.spacing_mm = core.spacing_mm;
      s.params.domain = core.domain;
    }
    out.push_back(std::move(s));
  }
  return out;
}

fs::path write_samples(const std::vector<Sample>& samples, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string());
  json entries = json::array();
  std::set<std::string> seen;
  for (const Sample& s : samples) {
    write_pair(dir, s.id, s.image, s.mask, seen);
    json e = core_to_json(s.id, s.image.spacing_mm, s.domain, s.seed,
                          s.true_crl_mm, s.true_ga_days);
    e["quality"] = s.quality;
    e["provenance"] = to_string(s.provenance);
    e["source_id"] = s.source_id;
    entries.push_back(std::move(e));
  }
  json manifest;
  manifest["samples"] = std::move(entries);
  fs::path path = dir / "manifest.json";
  write_manifest(manifest, path);
  return path;
}

std::vector<Sample> read_samples(const fs::path& dir) {
  json manifest = read_manifest(dir);
  std::vector<Sample> out;
  for (const json& entry : manifest["samples"]) {
    EntryCore core = core_from_json(entry, dir);
    Sample s;
    s.id = core.id;
    s.image = std::move(core.image);
    s.mask = std::move(core.mask);
    s.true_crl_mm = core.true_crl_mm;
    s.true_ga_days = core.true_ga_days;
    s.domain = core.domain;
    s.seed = core.seed;
    try {
      s.quality = entry.contains("quality") ? entry["quality"].get<int>() : 1;
      s.provenance = entry.contains("provenance")
                         ? parse_degrade_kind(entry["provenance"].get<std::string>())
                         : DegradeKind{};
      s.source_id = entry.contains("source_id")
                        ? entry["source_id"].get<std::string>()
                        : s.id;
    } catch (const json::exception& e) {
      throw DataError("manifest entry malformed: " + std::string(e.what()));
    }
    if (s.quality != 0 && s.quality != 1) {
      throw DataError("quality must be 0 or 1 for sample " + s.id);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fusqa
