// fusqa command-line tool. All functionality goes through the C API in
// fusqa/fusqa.h; exit codes are the fusqa_status values (0 ok, 1 usage,
// 2 data, 3 numeric).
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "fusqa/fusqa.h"

namespace {

int finish(fusqa_status status) {
  if (status != FUSQA_OK) {
    std::fprintf(stderr, "error: %s\n", fusqa_last_error());
  }
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusqa: fetal ultrasound segmentation quality assessment"};
  app.require_subcommand(1);

  // phantom
  int ph_count = 20;
  std::string ph_domain = "A";
  uint64_t ph_seed = 42;
  int ph_size = 64;
  std::string ph_out;
  auto* phantom = app.add_subcommand("phantom", "generate synthetic phantoms");
  phantom->add_option("--count", ph_count, "number of phantoms");
  phantom->add_option("--domain", ph_domain, "rendering domain")
      ->check(CLI::IsMember({"A", "B"}));
  phantom->add_option("--seed", ph_seed, "base seed");
  phantom->add_option("--size", ph_size, "image size in pixels");
  phantom->add_option("--out", ph_out, "output dataset directory")->required();

  // degrade
  std::string dg_in, dg_out;
  uint64_t dg_seed = 42;
  int dg_good = 4, dg_poor = 5;
  auto* degrade = app.add_subcommand("degrade", "expand phantoms into labeled variants");
  degrade->add_option("--in", dg_in, "phantom dataset directory")->required();
  degrade->add_option("--out", dg_out, "output dataset directory")->required();
  degrade->add_option("--seed", dg_seed, "base seed");
  degrade->add_option("--good", dg_good, "good variants per phantom");
  degrade->add_option("--poor", dg_poor, "poor variants per phantom");

  // train
  std::string tr_data, tr_topology = "single", tr_out;
  int tr_epochs = 24, tr_batch = 16;
  double tr_lr = 0.01;
  uint64_t tr_seed = 42;
  auto* train = app.add_subcommand("train", "train a quality classifier");
  train->add_option("--data", tr_data, "labeled dataset directory")->required();
  train->add_option("--topology", tr_topology, "single|siamese|synergic")
      ->check(CLI::IsMember({"single", "siamese", "synergic"}));
  train->add_option("--epochs", tr_epochs, "training epochs");
  train->add_option("--lr", tr_lr, "learning rate");
  train->add_option("--batch", tr_batch, "batch size");
  train->add_option("--seed", tr_seed, "seed");
  train->add_option("--out", tr_out, "checkpoint path")->required();

  // train-cae
  std::string tc_data, tc_out;
  int tc_epochs = 12;
  uint64_t tc_seed = 42;
  auto* train_cae = app.add_subcommand("train-cae", "train the autoencoder baseline");
  train_cae->add_option("--data", tc_data, "labeled dataset directory")->required();
  train_cae->add_option("--epochs", tc_epochs, "training epochs");
  train_cae->add_option("--seed", tc_seed, "seed");
  train_cae->add_option("--out", tc_out, "checkpoint path")->required();

  // eval
  std::string ev_model, ev_data, ev_report, ev_format = "json";
  double ev_tau = -1.0;
  auto* eval = app.add_subcommand("eval", "score a saved model on a dataset");
  eval->add_option("--model", ev_model, "checkpoint path")->required();
  eval->add_option("--tau", ev_tau, "difference-ratio threshold (cae models)");
  eval->add_option("--data", ev_data, "labeled dataset directory")->required();
  eval->add_option("--report", ev_report, "report output path")->required();
  eval->add_option("--format", ev_format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // measure
  std::string ms_mask, ms_dating;
  double ms_spacing = 1.0;
  auto* measure = app.add_subcommand("measure", "CRL and gestational age for a mask");
  measure->add_option("--mask", ms_mask, "mask PGM path")->required();
  measure->add_option("--spacing", ms_spacing, "pixel spacing in mm")->required();
  measure->add_option("--dating-config", ms_dating, "dating model JSON path");

  // bench
  std::string bn_config, bn_out;
  uint64_t bn_seed = 42;
  auto* bench = app.add_subcommand("bench", "run the train-A / test-B benchmark");
  bench->add_option("--config", bn_config, "benchmark config JSON path");
  bench->add_option("--seed", bn_seed, "benchmark seed");
  bench->add_option("--out", bn_out, "report output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*phantom) {
    fusqa_status st = fusqa_phantom_generate(ph_out.c_str(), ph_count,
                                             ph_domain[0], ph_seed, ph_size, 1.0);
    if (st == FUSQA_OK) {
      std::printf("wrote %d domain-%s phantoms to %s\n", ph_count,
                  ph_domain.c_str(), ph_out.c_str());
    }
    return finish(st);
  }
  if (*degrade) {
    fusqa_status st = fusqa_degrade_dataset(dg_in.c_str(), dg_out.c_str(), dg_seed,
                                            dg_good, dg_poor);
    if (st == FUSQA_OK) {
      std::printf("wrote degraded dataset to %s\n", dg_out.c_str());
    }
    return finish(st);
  }
  if (*train) {
    fusqa_status st = fusqa_train(tr_data.c_str(), tr_topology.c_str(), tr_epochs,
                                  tr_lr, tr_batch, tr_seed, tr_out.c_str());
    if (st == FUSQA_OK) {
      std::printf("saved %s model to %s\n", tr_topology.c_str(), tr_out.c_str());
    }
    return finish(st);
  }
  if (*train_cae) {
    fusqa_status st =
        fusqa_train_cae(tc_data.c_str(), tc_epochs, tc_seed, tc_out.c_str());
    if (st == FUSQA_OK) {
      std::printf("saved cae model to %s\n", tc_out.c_str());
    }
    return finish(st);
  }
  if (*eval) {
    fusqa_status st = fusqa_evaluate(ev_model.c_str(), ev_data.c_str(), ev_tau,
                                     ev_report.c_str(), ev_format.c_str());
    if (st == FUSQA_OK) {
      std::printf("wrote %s report to %s\n", ev_format.c_str(), ev_report.c_str());
    }
    return finish(st);
  }
  if (*measure) {
    double crl = 0.0, ga = 0.0;
    fusqa_status st =
        fusqa_measure_mask(ms_mask.c_str(), ms_spacing,
                           ms_dating.empty() ? nullptr : ms_dating.c_str(), &crl, &ga);
    if (st == FUSQA_OK) {
      std::printf("{\"crl_mm\": %.10g, \"ga_days\": %.10g}\n", crl, ga);
    } else if (!std::isnan(crl)) {
      // measurable but undatable: report the length, null out the age
      std::printf("{\"crl_mm\": %.10g, \"ga_days\": null}\n", crl);
    }
    return finish(st);
  }
  if (*bench) {
    fusqa_status st = fusqa_benchmark(bn_config.empty() ? nullptr : bn_config.c_str(),
                                      bn_seed, bn_out.c_str());
    if (st == FUSQA_OK) {
      std::printf("wrote report.json and report.csv to %s\n", bn_out.c_str());
    }
    return finish(st);
  }
  return 0;
}
