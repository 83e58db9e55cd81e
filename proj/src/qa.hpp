#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "degrade.hpp"
#include "grid.hpp"
#include "nn.hpp"

namespace fusqa {

enum class Topology { Single, Siamese, Synergic };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& text);

struct TrainConfig {
  int epochs = 24;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-3;  // L2 on conv/fc weights (biases exempt)
  int batch_size = 16;
  bool augment = true;
  int threads = 0;  // 0 = hardware concurrency
};

/// Quality classifier Q. Single runs one encoder on an (x, x, mask/4) stack;
/// Siamese runs one shared-weight encoder on the image and mask branches;
/// Synergic keeps two independent encoders. The head maps the latent (or the
/// two concatenated latents) to one logit; the sigmoid is applied at predict
/// time.
struct QaModel {
  Topology topology = Topology::Single;
  int input_size = 64;
  uint64_t seed = 0;
  nn::Network<float> encoder_a;
  nn::Network<float> encoder_b;  // Synergic only; empty otherwise
  nn::Network<float> head;
  nlohmann::json metadata;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  QaModel model;
  std::vector<EpochStats> history;
  int best_epoch = -1;  // -1 when epochs = 0 (model equals initialization)
};

/// Mask labels enter float channels as label/4 (values {0, .25, .5, .75, 1}).
/// Single -> one (x, x, mask/4) tensor; Siamese/Synergic -> branch A (x,x,x)
/// and branch B (mask/4 ...) as two tensors.
std::vector<nn::Tensor<float>> assemble_input(const GrayImage& image,
                                              const LabelMask& mask,
                                              Topology topology);

QaModel make_qa_model(Topology topology, int input_size, uint64_t seed);

/// Probability that (image, mask) is a good pair; verdict threshold 0.5
/// (probability >= 0.5 reads as good).
double predict(const QaModel& model, const GrayImage& image, const LabelMask& mask);

/// 90/10 split at source-phantom level, per-epoch seeded augmentation
/// (scale [0.9,1.1], hflip p=0.5, rotation +-10 deg), BCE + SGD with
/// momentum; returns the best-validation-accuracy epoch snapshot (ties go to
/// the earliest epoch). Deterministic in (dataset order, config, seed).
TrainResult train_qa(const std::vector<Sample>& dataset, Topology topology,
                     const TrainConfig& config, uint64_t seed);

void save_qa_model(const QaModel& model, const std::filesystem::path& path);
QaModel load_qa_model(const std::filesystem::path& path);

}  // namespace fusqa
