#include "fusqa/fusqa.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "benchmark.hpp"
#include "biometry.hpp"
#include "cae.hpp"
#include "dataset.hpp"
#include "degrade.hpp"
#include "errors.hpp"
#include "json.hpp"
#include "nn.hpp"
#include "pgm.hpp"
#include "phantom.hpp"
#include "qa.hpp"
#include "rng.hpp"

struct fusqa_dataset {
  std::vector<fusqa::Sample> samples;
};

struct fusqa_model {
  bool is_cae = false;
  fusqa::QaModel qa;
  fusqa::CaeModel cae;
};

namespace {

thread_local std::string t_last_error;

template <typename Fn>
fusqa_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return FUSQA_OK;
  } catch (const fusqa::UsageError& e) {
    t_last_error = e.what();
    return FUSQA_USAGE_ERROR;
  } catch (const fusqa::NumericError& e) {
    t_last_error = e.what();
    return FUSQA_NUMERIC_ERROR;
  } catch (const std::exception& e) {  // DataError and anything unforeseen
    t_last_error = e.what();
    return FUSQA_DATA_ERROR;
  } catch (...) {
    t_last_error = "unknown error";
    return FUSQA_DATA_ERROR;
  }
}

fusqa_status fail_usage(const std::string& message) {
  t_last_error = message;
  return FUSQA_USAGE_ERROR;
}

fusqa::DatingModel load_dating(const char* path) {
  fusqa::DatingModel model;
  if (!path) return model;
  std::ifstream in(path);
  if (!in) throw fusqa::DataError(std::string("cannot read ") + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw fusqa::UsageError(std::string("dating config parse error in ") + path +
                            ": " + e.what());
  }
  if (!j.is_object()) throw fusqa::UsageError("dating config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) {
      throw fusqa::UsageError("dating key " + key + " must be a number");
    }
    if (key == "c0") {
      model.c0 = value.get<double>();
    } else if (key == "c1") {
      model.c1 = value.get<double>();
    } else if (key == "c2") {
      model.c2 = value.get<double>();
    } else if (key == "valid_lo_mm") {
      model.valid_lo_mm = value.get<double>();
    } else if (key == "valid_hi_mm") {
      model.valid_hi_mm = value.get<double>();
    } else {
      throw fusqa::UsageError("unknown dating key: " + key);
    }
  }
  return model;
}

}  // namespace

extern "C" {

const char* fusqa_version(void) { return "1.0.0"; }

const char* fusqa_last_error(void) { return t_last_error.c_str(); }

fusqa_status fusqa_phantom_generate(const char* out_dir, int count, char domain,
                                    uint64_t seed, int image_size,
                                    double spacing_mm) {
  if (!out_dir) return fail_usage("out_dir is null");
  if (domain != 'A' && domain != 'B') return fail_usage("domain must be 'A' or 'B'");
  return guarded([&] {
    fusqa::PhantomConfig config;
    config.image_size = image_size;
    config.spacing_mm = spacing_mm;
    config.domain = domain;
    auto phantoms = fusqa::generate_phantoms(seed, count, config);
    fusqa::write_dataset(phantoms, out_dir);
  });
}

fusqa_status fusqa_degrade_dataset(const char* in_dir, const char* out_dir,
                                   uint64_t seed, int n_good, int n_poor) {
  if (!in_dir) return fail_usage("in_dir is null");
  if (!out_dir) return fail_usage("out_dir is null");
  return guarded([&] {
    auto phantoms = fusqa::read_dataset(in_dir);
    std::vector<fusqa::Sample> samples;
    samples.reserve(phantoms.size() * size_t(1 + std::max(n_good, 0) + std::max(n_poor, 0)));
    for (size_t i = 0; i < phantoms.size(); ++i) {
      auto variants = fusqa::make_variant_set(phantoms[i], fusqa::derive_seed(seed, i),
                                              n_good, n_poor);
      for (auto& v : variants) samples.push_back(std::move(v));
    }
    fusqa::write_samples(samples, out_dir);
  });
}

fusqa_status fusqa_dataset_open(const char* dir, fusqa_dataset** out) {
  if (!dir) return fail_usage("dir is null");
  if (!out) return fail_usage("out is null");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<fusqa_dataset>();
    handle->samples = fusqa::read_samples(dir);
    *out = handle.release();
  });
}

void fusqa_dataset_close(fusqa_dataset* dataset) { delete dataset; }

fusqa_status fusqa_dataset_size(const fusqa_dataset* dataset, size_t* out) {
  if (!dataset) return fail_usage("dataset is null");
  if (!out) return fail_usage("out is null");
  *out = dataset->samples.size();
  t_last_error.clear();
  return FUSQA_OK;
}

fusqa_status fusqa_train(const char* data_dir, const char* topology, int epochs,
                         double lr, int batch_size, uint64_t seed,
                         const char* out_path) {
  if (!data_dir) return fail_usage("data_dir is null");
  if (!topology) return fail_usage("topology is null");
  if (!out_path) return fail_usage("out_path is null");
  return guarded([&] {
    fusqa::Topology topo = fusqa::topology_from_string(topology);
    fusqa::TrainConfig config;
    config.epochs = epochs;
    config.lr = lr;
    config.batch_size = batch_size;
    auto samples = fusqa::read_samples(data_dir);
    auto result = fusqa::train_qa(samples, topo, config, seed);
    fusqa::save_qa_model(result.model, out_path);
  });
}

fusqa_status fusqa_train_cae(const char* data_dir, int epochs, uint64_t seed,
                             const char* out_path) {
  if (!data_dir) return fail_usage("data_dir is null");
  if (!out_path) return fail_usage("out_path is null");
  return guarded([&] {
    auto samples = fusqa::read_samples(data_dir);
    std::vector<fusqa::LabelMask> masks;
    for (const auto& s : samples) {
      if (s.quality == 1) masks.push_back(s.mask);
    }
    fusqa::CaeConfig config;
    config.epochs = epochs;
    auto model = fusqa::train_cae(masks, config, seed);
    fusqa::save_cae_model(model, out_path);
  });
}

fusqa_status fusqa_model_open(const char* path, fusqa_model** out) {
  if (!path) return fail_usage("path is null");
  if (!out) return fail_usage("out is null");
  *out = nullptr;
  return guarded([&] {
    auto checkpoint = fusqa::nn::load_checkpoint(path);
    if (!checkpoint.header.contains("kind")) {
      throw fusqa::DataError("checkpoint header has no kind field");
    }
    std::string kind = checkpoint.header["kind"].get<std::string>();
    auto handle = std::make_unique<fusqa_model>();
    if (kind == "qa") {
      handle->qa = fusqa::load_qa_model(path);
    } else if (kind == "cae") {
      handle->is_cae = true;
      handle->cae = fusqa::load_cae_model(path);
    } else {
      throw fusqa::DataError("checkpoint has unknown kind: " + kind);
    }
    *out = handle.release();
  });
}

void fusqa_model_close(fusqa_model* model) { delete model; }

fusqa_status fusqa_model_kind(const fusqa_model* model, char* buf, size_t buf_len) {
  if (!model) return fail_usage("model is null");
  if (!buf) return fail_usage("buf is null");
  std::string kind =
      model->is_cae ? "cae" : "qa:" + fusqa::to_string(model->qa.topology);
  if (buf_len <= kind.size()) return fail_usage("kind buffer too small");
  std::memcpy(buf, kind.c_str(), kind.size() + 1);
  t_last_error.clear();
  return FUSQA_OK;
}

fusqa_status fusqa_model_set_tau(fusqa_model* model, double tau) {
  if (!model) return fail_usage("model is null");
  if (!model->is_cae) return fail_usage("tau applies only to cae models");
  if (!(tau >= 0.0)) return fail_usage("tau must be non-negative");
  model->cae.tau = tau;
  t_last_error.clear();
  return FUSQA_OK;
}

fusqa_status fusqa_predict(const fusqa_model* model, const fusqa_dataset* dataset,
                           size_t index, double* score, int* verdict_good) {
  if (!model) return fail_usage("model is null");
  if (!dataset) return fail_usage("dataset is null");
  if (index >= dataset->samples.size()) return fail_usage("sample index out of range");
  return guarded([&] {
    const fusqa::Sample& s = dataset->samples[index];
    double value = 0.0;
    bool good = false;
    if (model->is_cae) {
      fusqa::CaeScore sc = fusqa::cae_score(model->cae, s.mask);
      value = sc.ratio;
      good = sc.good;
    } else {
      value = fusqa::predict(model->qa, s.image, s.mask);
      good = value >= 0.5;
    }
    if (score) *score = value;
    if (verdict_good) *verdict_good = good ? 1 : 0;
  });
}

fusqa_status fusqa_evaluate(const char* model_path, const char* data_dir,
                            double tau, const char* report_path,
                            const char* format) {
  if (!model_path) return fail_usage("model_path is null");
  if (!data_dir) return fail_usage("data_dir is null");
  if (!report_path) return fail_usage("report_path is null");
  return guarded([&] {
    auto samples = fusqa::read_samples(data_dir);
    auto report = fusqa::evaluate_model_file(model_path, samples, tau,
                                             fusqa::DatingModel{}, 0);
    fusqa::write_report(report, report_path, format ? format : "json");
  });
}

fusqa_status fusqa_measure_mask(const char* mask_path, double spacing_mm,
                                const char* dating_config_path, double* crl_mm,
                                double* ga_days) {
  if (!mask_path) return fail_usage("mask_path is null");
  if (!crl_mm) return fail_usage("crl_mm is null");
  if (!ga_days) return fail_usage("ga_days is null");
  *crl_mm = std::numeric_limits<double>::quiet_NaN();
  *ga_days = std::numeric_limits<double>::quiet_NaN();
  return guarded([&] {
    fusqa::DatingModel dating = load_dating(dating_config_path);
    fusqa::LabelMask mask = fusqa::read_pgm_mask(mask_path, spacing_mm);
    fusqa::CrlMeasurement m = fusqa::measure_crl(mask);
    *crl_mm = m.length_mm;  // kept even when dating fails below
    *ga_days = fusqa::ga_from_crl(m.length_mm, dating);
  });
}

fusqa_status fusqa_benchmark(const char* config_path, uint64_t seed,
                             const char* out_dir) {
  if (!out_dir) return fail_usage("out_dir is null");
  return guarded([&] {
    fusqa::BenchConfig config;
    if (config_path) {
      std::ifstream in(config_path);
      if (!in) throw fusqa::DataError(std::string("cannot read ") + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw fusqa::UsageError(std::string("config parse error in ") +
                                config_path + ": " + e.what());
      }
      config = fusqa::bench_config_from_json(j);
    }
    auto report = fusqa::run_benchmark(config, seed);
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    fusqa::write_report(report, dir / "report.json", "json");
    fusqa::write_report(report, dir / "report.csv", "csv");
  });
}

}  // extern "C"
