#include "benchmark.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "dataset.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "phantom.hpp"

namespace fusqa {

using nlohmann::json;

namespace {

// Rethrow stage failures with the stage name prefixed, preserving the type.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    throw UsageError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

void apply_keys(const json& j, const char* where,
                const std::function<bool(const std::string&, const json&)>& apply) {
  if (!j.is_object()) throw UsageError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    try {
      known = apply(key, value);
    } catch (const json::exception&) {
      throw UsageError("config key " + std::string(where) + "." + key + " has the wrong type");
    }
    if (!known) {
      throw UsageError("unknown config key: " + std::string(where) + "." + key);
    }
  }
}

std::string now_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json group_to_json(bool has_mean, double crl_err, double ga_err, int n,
                   int undatable, int unmeasurable, int predicted) {
  json g;
  g["crl_err_mm"] = has_mean ? json(crl_err) : json(nullptr);
  g["ga_err_days"] = has_mean ? json(ga_err) : json(nullptr);
  g["n"] = n;
  g["undatable"] = undatable;
  g["unmeasurable"] = unmeasurable;
  g["predicted"] = predicted;
  return g;
}

}  // namespace

json bench_config_to_json(const BenchConfig& c) {
  json j;
  j["n_train_phantoms"] = c.n_train_phantoms;
  j["n_test_phantoms"] = c.n_test_phantoms;
  j["image_size"] = c.image_size;
  j["spacing_mm"] = c.spacing_mm;
  j["train_good"] = c.train_good;
  j["train_poor"] = c.train_poor;
  j["test_good"] = c.test_good;
  j["test_poor"] = c.test_poor;
  json topo = json::array();
  for (Topology t : c.topologies) topo.push_back(to_string(t));
  j["topologies"] = std::move(topo);
  j["tau"] = c.tau;
  j["train"] = {{"epochs", c.train.epochs},       {"lr", c.train.lr},
                {"momentum", c.train.momentum},   {"weight_decay", c.train.weight_decay},
                {"batch_size", c.train.batch_size},
                {"augment", c.train.augment},     {"threads", c.train.threads}};
  j["cae"] = {{"epochs", c.cae.epochs},           {"lr", c.cae.lr},
              {"momentum", c.cae.momentum},       {"batch_size", c.cae.batch_size},
              {"channels1", c.cae.channels1},     {"channels2", c.cae.channels2},
              {"threads", c.cae.threads}};
  j["dating"] = {{"c0", c.dating.c0},
                 {"c1", c.dating.c1},
                 {"c2", c.dating.c2},
                 {"valid_lo_mm", c.dating.valid_lo_mm},
                 {"valid_hi_mm", c.dating.valid_hi_mm}};
  return j;
}

BenchConfig bench_config_from_json(const json& j) {
  BenchConfig c;
  apply_keys(j, "config", [&](const std::string& key, const json& v) {
    if (key == "n_train_phantoms") { c.n_train_phantoms = v.get<int>(); return true; }
    if (key == "n_test_phantoms") { c.n_test_phantoms = v.get<int>(); return true; }
    if (key == "image_size") { c.image_size = v.get<int>(); return true; }
    if (key == "spacing_mm") { c.spacing_mm = v.get<double>(); return true; }
    if (key == "train_good") { c.train_good = v.get<int>(); return true; }
    if (key == "train_poor") { c.train_poor = v.get<int>(); return true; }
    if (key == "test_good") { c.test_good = v.get<int>(); return true; }
    if (key == "test_poor") { c.test_poor = v.get<int>(); return true; }
    if (key == "tau") { c.tau = v.get<double>(); return true; }
    if (key == "topologies") {
      c.topologies.clear();
      for (const json& t : v) c.topologies.push_back(topology_from_string(t.get<std::string>()));
      return true;
    }
    if (key == "train") {
      apply_keys(v, "train", [&](const std::string& k2, const json& v2) {
        if (k2 == "epochs") { c.train.epochs = v2.get<int>(); return true; }
        if (k2 == "lr") { c.train.lr = v2.get<double>(); return true; }
        if (k2 == "momentum") { c.train.momentum = v2.get<double>(); return true; }
        if (k2 == "weight_decay") { c.train.weight_decay = v2.get<double>(); return true; }
        if (k2 == "batch_size") { c.train.batch_size = v2.get<int>(); return true; }
        if (k2 == "augment") { c.train.augment = v2.get<bool>(); return true; }
        if (k2 == "threads") { c.train.threads = v2.get<int>(); return true; }
        return false;
      });
      return true;
    }
    if (key == "cae") {
      apply_keys(v, "cae", [&](const std::string& k2, const json& v2) {
        if (k2 == "epochs") { c.cae.epochs = v2.get<int>(); return true; }
        if (k2 == "lr") { c.cae.lr = v2.get<double>(); return true; }
        if (k2 == "momentum") { c.cae.momentum = v2.get<double>(); return true; }
        if (k2 == "batch_size") { c.cae.batch_size = v2.get<int>(); return true; }
        if (k2 == "channels1") { c.cae.channels1 = v2.get<int>(); return true; }
        if (k2 == "channels2") { c.cae.channels2 = v2.get<int>(); return true; }
        if (k2 == "threads") { c.cae.threads = v2.get<int>(); return true; }
        return false;
      });
      return true;
    }
    if (key == "dating") {
      apply_keys(v, "dating", [&](const std::string& k2, const json& v2) {
        if (k2 == "c0") { c.dating.c0 = v2.get<double>(); return true; }
        if (k2 == "c1") { c.dating.c1 = v2.get<double>(); return true; }
        if (k2 == "c2") { c.dating.c2 = v2.get<double>(); return true; }
        if (k2 == "valid_lo_mm") { c.dating.valid_lo_mm = v2.get<double>(); return true; }
        if (k2 == "valid_hi_mm") { c.dating.valid_hi_mm = v2.get<double>(); return true; }
        return false;
      });
      return true;
    }
    return false;
  });
  c.cae.tau = c.tau;
  return c;
}

ScoredModel score_qa_model(const QaModel& model, const std::vector<Sample>& samples,
                           const std::string& name, int threads) {
  ScoredModel out;
  out.name = name;
  out.predicted_good.assign(samples.size(), false);
  std::vector<uint8_t> verdicts(samples.size(), 0);
  parallel_for(static_cast<int>(samples.size()), threads, [&](int i) {
    const Sample& s = samples[static_cast<size_t>(i)];
    verdicts[static_cast<size_t>(i)] = predict(model, s.image, s.mask) >= 0.5 ? 1 : 0;
  });
  for (size_t i = 0; i < samples.size(); ++i) {
    bool pred = verdicts[i] != 0;
    bool actual = samples[i].quality == 1;
    out.predicted_good[i] = pred;
    if (pred && actual) ++out.counts.tp;
    else if (pred && !actual) ++out.counts.fp;
    else if (!pred && actual) ++out.counts.fn;
    else ++out.counts.tn;
  }
  out.metrics = compute_metrics(out.counts);
  return out;
}

ScoredModel score_cae_model(const CaeModel& model, const std::vector<Sample>& samples,
                            int threads) {
  ScoredModel out;
  out.name = "cae";
  out.predicted_good.assign(samples.size(), false);
  std::vector<uint8_t> verdicts(samples.size(), 0);
  parallel_for(static_cast<int>(samples.size()), threads, [&](int i) {
    verdicts[static_cast<size_t>(i)] =
        cae_score(model, samples[static_cast<size_t>(i)].mask).good ? 1 : 0;
  });
  for (size_t i = 0; i < samples.size(); ++i) {
    bool pred = verdicts[i] != 0;
    bool actual = samples[i].quality == 1;
    out.predicted_good[i] = pred;
    if (pred && actual) ++out.counts.tp;
    else if (pred && !actual) ++out.counts.fp;
    else if (!pred && actual) ++out.counts.fn;
    else ++out.counts.tn;
  }
  out.metrics = compute_metrics(out.counts);
  return out;
}

DownstreamErrors downstream_for(const std::vector<Sample>& samples,
                                const std::vector<bool>& predicted_good,
                                const DatingModel& dating) {
  if (samples.size() != predicted_good.size()) {
    throw UsageError("predictions and samples must align");
  }
  std::vector<DownstreamCase> cases(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    cases[i] = {&samples[i].mask, samples[i].true_crl_mm, samples[i].true_ga_days,
                predicted_good[i]};
  }
  return downstream_errors(cases, dating);
}

json metrics_to_json(const ScoredModel& s) {
  json j;
  j["counts"] = {{"tp", s.counts.tp}, {"fp", s.counts.fp},
                 {"tn", s.counts.tn}, {"fn", s.counts.fn}};
  j["metrics"] = {{"accuracy", s.metrics.accuracy},
                  {"precision", s.metrics.precision},
                  {"precision_defined", s.metrics.precision_defined},
                  {"recall", s.metrics.recall},
                  {"recall_defined", s.metrics.recall_defined},
                  {"f1", s.metrics.f1},
                  {"f1_defined", s.metrics.f1_defined}};
  return j;
}

json downstream_to_json(const DownstreamErrors& d, const std::string& model_name) {
  json j;
  j["model"] = model_name;
  j["good"] = group_to_json(d.has_good_mean, d.mean_abs_crl_error_good_mm,
                            d.mean_abs_ga_error_good_days, d.n_good,
                            d.n_good_undatable, d.n_good_unmeasurable,
                            d.n_good_predicted);
  j["poor"] = group_to_json(d.has_poor_mean, d.mean_abs_crl_error_poor_mm,
                            d.mean_abs_ga_error_poor_days, d.n_poor,
                            d.n_poor_undatable, d.n_poor_unmeasurable,
                            d.n_poor_predicted);
  return j;
}

EvalReport run_benchmark(const BenchConfig& config, uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  if (config.topologies.empty()) {
    throw UsageError("benchmark config needs at least one topology");
  }

  // Seed-range partition: domain A phantoms draw from seed*1e6 + i, domain B
  // from seed*1e6 + 500000 + i, so test phantoms never share a seed with
  // training ones.
  uint64_t base_a = seed * 1000000ull;
  uint64_t base_b = base_a + 500000ull;

  PhantomConfig cfg_a;
  cfg_a.image_size = config.image_size;
  cfg_a.spacing_mm = config.spacing_mm;
  cfg_a.domain = 'A';
  PhantomConfig cfg_b = cfg_a;
  cfg_b.domain = 'B';

  std::vector<PhantomSample> phantoms_a = stage("generate-domain-a", [&] {
    return generate_phantoms(base_a, config.n_train_phantoms, cfg_a);
  });
  std::vector<Sample> train_samples = stage("degrade-train", [&] {
    std::vector<Sample> all;
    for (const PhantomSample& p : phantoms_a) {
      std::vector<Sample> v = make_variant_set(p, derive_seed(p.seed, 7),
                                               config.train_good, config.train_poor);
      for (Sample& s : v) all.push_back(std::move(s));
    }
    return all;
  });
  phantoms_a.clear();

  std::vector<PhantomSample> phantoms_b = stage("generate-domain-b", [&] {
    return generate_phantoms(base_b, config.n_test_phantoms, cfg_b);
  });
  std::vector<Sample> test_samples = stage("degrade-test", [&] {
    std::vector<Sample> all;
    for (const PhantomSample& p : phantoms_b) {
      std::vector<Sample> v = make_variant_set(p, derive_seed(p.seed, 7),
                                               config.test_good, config.test_poor);
      for (Sample& s : v) all.push_back(std::move(s));
    }
    return all;
  });
  phantoms_b.clear();

  std::vector<ScoredModel> scored;
  std::vector<QaModel> qa_models;
  for (size_t i = 0; i < config.topologies.size(); ++i) {
    Topology topo = config.topologies[i];
    std::string name = to_string(topo);
    std::string stage_name = "train-qa-" + name;
    TrainResult tr = stage(stage_name.c_str(), [&] {
      return train_qa(train_samples, topo, config.train,
                      derive_seed(seed, 21 + i));
    });
    qa_models.push_back(std::move(tr.model));
  }

  CaeConfig cae_cfg = config.cae;
  cae_cfg.tau = config.tau;
  CaeModel cae_model = stage("train-cae", [&] {
    std::vector<LabelMask> good_masks;
    for (const Sample& s : train_samples) {
      if (s.quality == 1) good_masks.push_back(s.mask);
    }
    return train_cae(good_masks, cae_cfg, derive_seed(seed, 31));
  });

  int threads = resolve_threads(config.train.threads);
  stage("score", [&] {
    for (size_t i = 0; i < config.topologies.size(); ++i) {
      scored.push_back(score_qa_model(qa_models[i], test_samples,
                                      to_string(config.topologies[i]), threads));
    }
    scored.push_back(score_cae_model(cae_model, test_samples, threads));
    return 0;
  });

  // Downstream study follows the best-accuracy QA topology (ties keep the
  // earlier topology in config order); the CAE is a baseline, not a gate.
  size_t best = 0;
  for (size_t i = 1; i < config.topologies.size(); ++i) {
    if (scored[i].metrics.accuracy > scored[best].metrics.accuracy) best = i;
  }
  DownstreamErrors downstream = stage("downstream", [&] {
    return downstream_for(test_samples, scored[best].predicted_good, config.dating);
  });

  int64_t test_good = 0, test_poor = 0;
  for (const Sample& s : test_samples) (s.quality == 1 ? test_good : test_poor)++;

  EvalReport report;
  report.body["config"] = bench_config_to_json(config);
  report.body["seed"] = seed;
  report.body["dataset"] = {{"train_samples", train_samples.size()},
                            {"test_samples", test_samples.size()},
                            {"test_good", test_good},
                            {"test_poor", test_poor}};
  json models = json::object();
  for (const ScoredModel& s : scored) models[s.name] = metrics_to_json(s);
  report.body["models"] = std::move(models);
  report.body["downstream"] = downstream_to_json(downstream, scored[best].name);
  report.timestamp = now_utc();
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EvalReport evaluate_model_file(const std::filesystem::path& model_path,
                               const std::vector<Sample>& samples, double tau,
                               const DatingModel& dating, int threads) {
  auto t0 = std::chrono::steady_clock::now();
  if (samples.empty()) throw DataError("dataset is empty");
  threads = resolve_threads(threads);

  std::string kind;
  try {
    kind = nn::load_checkpoint(model_path).header.at("kind").get<std::string>();
  } catch (const json::exception&) {
    throw DataError("checkpoint header has no kind field");
  }
  ScoredModel scored;
  if (kind == "qa") {
    QaModel model = load_qa_model(model_path);
    scored = score_qa_model(model, samples, to_string(model.topology), threads);
  } else if (kind == "cae") {
    CaeModel model = load_cae_model(model_path);
    if (tau >= 0.0) model.tau = tau;
    scored = score_cae_model(model, samples, threads);
  } else {
    throw DataError("checkpoint has unknown kind: " + kind);
  }
  DownstreamErrors downstream = downstream_for(samples, scored.predicted_good, dating);

  int64_t n_good = 0, n_poor = 0;
  for (const Sample& s : samples) (s.quality == 1 ? n_good : n_poor)++;
  EvalReport report;
  report.body["dataset"] = {{"test_samples", samples.size()},
                            {"test_good", n_good},
                            {"test_poor", n_poor}};
  report.body["models"] = {{scored.name, metrics_to_json(scored)}};
  report.body["downstream"] = downstream_to_json(downstream, scored.name);
  report.timestamp = now_utc();
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_report(const EvalReport& report, const std::filesystem::path& path,
                  const std::string& format) {
  if (format == "json") {
    json full;
    full["body"] = report.body;
    full["meta"] = {{"runtime_seconds", report.runtime_seconds},
                    {"timestamp", report.timestamp}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << full.dump(2) << '\n';
    if (!out.good()) throw DataError("cannot write " + path.string());
    return;
  }
  if (format != "csv") throw UsageError("report format must be json or csv");

  // Doubles go through the JSON serializer for shortest-roundtrip formatting.
  auto num = [](const json& v) { return v.is_null() ? std::string("nan") : v.dump(); };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "model,precision,recall,accuracy,f1\n";
  for (const auto& [name, m] : report.body.at("models").items()) {
    const json& mm = m.at("metrics");
    out << name << ',' << num(mm.at("precision")) << ',' << num(mm.at("recall"))
        << ',' << num(mm.at("accuracy")) << ',' << num(mm.at("f1")) << '\n';
  }
  if (!out.good()) throw DataError("cannot write " + path.string());

  std::filesystem::path side = path;
  side.replace_filename(path.stem().string() + "_downstream" +
                        (path.has_extension() ? path.extension().string() : ".csv"));
  std::ofstream ds(side, std::ios::binary);
  if (!ds) throw DataError("cannot write " + side.string());
  ds << "group,crl_err_mm,ga_err_days,n,undatable\n";
  if (report.body.contains("downstream")) {
    const json& d = report.body["downstream"];
    for (const char* group : {"good", "poor"}) {
      const json& g = d.at(group);
      ds << group << ',' << num(g.at("crl_err_mm")) << ',' << num(g.at("ga_err_days"))
         << ',' << g.at("n").dump() << ',' << g.at("undatable").dump() << '\n';
    }
  }
  if (!ds.good()) throw DataError("cannot write " + side.string());
}

}  // namespace fusqa
