#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "biometry.hpp"
#include "cae.hpp"
#include "degrade.hpp"
#include "json.hpp"
#include "metrics.hpp"
#include "qa.hpp"

namespace fusqa {

/// Full benchmark configuration; every field has a CPU-friendly default and
/// can be overridden from a JSON config file.
struct BenchConfig {
  int n_train_phantoms = 200;
  int n_test_phantoms = 100;
  int image_size = 64;
  double spacing_mm = 1.0;
  int train_good = 4;
  int train_poor = 5;
  int test_good = 1;  // + the original -> 2 good vs 2 poor per test phantom
  int test_poor = 2;
  std::vector<Topology> topologies = {Topology::Single, Topology::Siamese,
                                      Topology::Synergic};
  TrainConfig train;
  CaeConfig cae;
  double tau = 0.10;
  DatingModel dating;
};

nlohmann::json bench_config_to_json(const BenchConfig& config);

/// Defaults overridden by whatever keys the JSON provides; unknown keys are
/// rejected so typos fail loudly.
BenchConfig bench_config_from_json(const nlohmann::json& j);

struct ScoredModel {
  std::string name;
  ConfusionCounts counts;
  Metrics metrics;
  std::vector<bool> predicted_good;  // aligned with the scored sample list
};

ScoredModel score_qa_model(const QaModel& model, const std::vector<Sample>& samples,
                           const std::string& name, int threads);
ScoredModel score_cae_model(const CaeModel& model, const std::vector<Sample>& samples,
                            int threads);

/// Downstream CRL/GA error study for one model's predictions.
DownstreamErrors downstream_for(const std::vector<Sample>& samples,
                                const std::vector<bool>& predicted_good,
                                const DatingModel& dating);

nlohmann::json metrics_to_json(const ScoredModel& scored);
nlohmann::json downstream_to_json(const DownstreamErrors& d, const std::string& model_name);

/// Report = deterministic body + wall-clock meta kept outside the body so
/// reruns with one (config, seed) are byte-identical where it matters.
struct EvalReport {
  nlohmann::json body;
  std::string timestamp;  // ISO 8601 UTC
  double runtime_seconds = 0.0;
};

/// Train-on-A / test-on-shifted-B pipeline: phantoms, variants, QA topologies
/// + CAE, scoring, metrics, downstream errors. Deterministic in
/// (config, seed); stage failures rethrow with the stage name prefixed.
EvalReport run_benchmark(const BenchConfig& config, uint64_t seed);

/// JSON: {meta, body}. CSV: metrics table at `path` plus a downstream table
/// next to it (suffix "_downstream.csv").
void write_report(const EvalReport& report, const std::filesystem::path& path,
                  const std::string& format);

/// Scores one saved model (QA or CAE checkpoint) on a labeled sample set and
/// assembles a single-model report. tau < 0 keeps the checkpoint's own
/// threshold (CAE only; ignored for QA models).
EvalReport evaluate_model_file(const std::filesystem::path& model_path,
                               const std::vector<Sample>& samples, double tau,
                               const DatingModel& dating, int threads);

}  // namespace fusqa
