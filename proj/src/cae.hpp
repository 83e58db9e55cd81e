#pragma once

#include <filesystem>
#include <vector>

#include "grid.hpp"
#include "nn.hpp"

namespace fusqa {

struct CaeConfig {
  int epochs = 12;
  double lr = 0.05;
  double momentum = 0.9;
  int batch_size = 16;
  double tau = 0.10;
  int threads = 0;  // 0 = hardware concurrency
  int channels1 = 8;   // first encoder width
  int channels2 = 16;  // bottleneck width
};

/// Anomaly-detection baseline: a convolutional autoencoder trained on good
/// masks only. Masks enter one-hot (5 channels); the decoder emits per-pixel
/// 5-class logits at the input resolution.
struct CaeModel {
  int input_size = 64;
  double tau = 0.10;
  uint64_t seed = 0;
  nn::Network<float> net;
  nlohmann::json metadata;
};

/// Per-pixel cross entropy against each mask's own labels; two pool stages
/// down, two nearest-neighbor x2 + conv stages up. Deterministic in seed.
CaeModel train_cae(const std::vector<LabelMask>& good_masks,
                   const CaeConfig& config, uint64_t seed);

/// Argmax decoding of the reconstruction (ties take the lowest class).
LabelMask cae_reconstruct(const CaeModel& model, const LabelMask& mask);

struct CaeScore {
  double ratio = 1.0;
  bool good = false;  // good iff ratio < tau, strictly
};

/// Difference ratio between the mask and its reconstruction over their
/// foreground union. An empty union scores (1.0, poor).
CaeScore cae_score(const CaeModel& model, const LabelMask& mask);

void save_cae_model(const CaeModel& model, const std::filesystem::path& path);
CaeModel load_cae_model(const std::filesystem::path& path);

}  // namespace fusqa
