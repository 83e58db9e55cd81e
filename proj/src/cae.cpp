#include "cae.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace fusqa {

namespace {

std::vector<nn::LayerSpec> cae_specs(int c1, int c2) {
  using L = nn::LayerSpec;
  return {L::conv(kNumClasses, c1), L::relu(), L::maxpool(),
          L::conv(c1, c2), L::relu(), L::maxpool(),
          L::upsample(), L::conv(c2, c1), L::relu(),
          L::upsample(), L::conv(c1, kNumClasses)};
}

nn::Tensor<float> one_hot(const LabelMask& mask) {
  nn::Tensor<float> t = nn::Tensor<float>::zeros({kNumClasses, mask.height, mask.width});
  size_t plane = mask.labels.size();
  for (size_t i = 0; i < plane; ++i) {
    t.data[mask.labels[i] * plane + i] = 1.0f;
  }
  return t;
}

/// Mean per-pixel softmax cross entropy against the mask's own labels, and
/// its gradient w.r.t. the logits.
double softmax_ce(const nn::Tensor<float>& logits, const LabelMask& mask,
                  nn::Tensor<float>* grad) {
  size_t plane = mask.labels.size();
  if (grad) *grad = nn::Tensor<float>::zeros(logits.shape);
  double total = 0.0;
  float inv_n = 1.0f / static_cast<float>(plane);
  for (size_t p = 0; p < plane; ++p) {
    float mx = logits.data[p];
    for (int c = 1; c < kNumClasses; ++c) {
      mx = std::max(mx, logits.data[c * plane + p]);
    }
    float denom = 0.0f;
    float ex[kNumClasses];
    for (int c = 0; c < kNumClasses; ++c) {
      ex[c] = std::exp(logits.data[c * plane + p] - mx);
      denom += ex[c];
    }
    uint8_t label = mask.labels[p];
    total -= std::log(std::max(ex[label] / denom, 1e-30f));
    if (grad) {
      for (int c = 0; c < kNumClasses; ++c) {
        float soft = ex[c] / denom;
        grad->data[c * plane + p] = (soft - (c == label ? 1.0f : 0.0f)) * inv_n;
      }
    }
  }
  return total / static_cast<double>(plane);
}

void check_cae_mask(const LabelMask& mask, int size) {
  if (mask.width != size || mask.height != size) {
    throw UsageError("size mismatch: model expects " + std::to_string(size) +
                     "x" + std::to_string(size) + " masks");
  }
}

}  // namespace

CaeModel train_cae(const std::vector<LabelMask>& good_masks,
                   const CaeConfig& config, uint64_t seed) {
  if (good_masks.empty()) throw UsageError("train_cae requires at least one mask");
  int size = good_masks[0].width;
  for (const LabelMask& m : good_masks) {
    m.validate();
    if (m.width != size || m.height != size) {
      throw UsageError("size mismatch: masks must share one square size");
    }
  }
  if (size < 4 || size % 4 != 0) {
    throw UsageError("mask size must be a positive multiple of 4");
  }
  if (config.epochs < 0 || config.batch_size < 1 || config.channels1 < 1 ||
      config.channels2 < 1) {
    throw UsageError("cae config requires epochs >= 0, batch_size >= 1 and positive widths");
  }

  CaeModel model;
  model.input_size = size;
  model.tau = config.tau;
  model.seed = seed;
  model.net = nn::make_network<float>(cae_specs(config.channels1, config.channels2),
                                      derive_seed(seed, 4));
  int threads = resolve_threads(config.threads);
  nn::SgdState<float> vel;
  float lr = static_cast<float>(config.lr);
  float momentum = static_cast<float>(config.momentum);

  std::vector<int> indices(good_masks.size());
  for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);

  struct SampleOut {
    nn::Gradients<float> grads;
    double loss = 0.0;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<int> order = indices;
    Rng order_rng(seed, 3000 + static_cast<uint64_t>(epoch));
    order_rng.shuffle(order);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      size_t n = std::min(order.size() - start, static_cast<size_t>(config.batch_size));
      std::vector<SampleOut> outs(n);
      parallel_for(static_cast<int>(n), threads, [&](int i) {
        const LabelMask& m = good_masks[static_cast<size_t>(order[start + static_cast<size_t>(i)])];
        nn::ForwardCache<float> cache;
        nn::Tensor<float> logits = nn::forward(model.net, one_hot(m), &cache);
        nn::Tensor<float> dlogits;
        outs[static_cast<size_t>(i)].loss = softmax_ce(logits, m, &dlogits);
        outs[static_cast<size_t>(i)].grads = nn::backward(model.net, cache, dlogits);
      });
      nn::Gradients<float> g;
      for (const SampleOut& so : outs) nn::accumulate(g, so.grads);
      nn::scale_gradients(g, 1.0f / static_cast<float>(n));
      nn::sgd_step(model.net, g, vel, lr, momentum);
    }
  }
  model.metadata["epochs"] = config.epochs;
  model.metadata["lr"] = config.lr;
  model.metadata["momentum"] = config.momentum;
  model.metadata["batch_size"] = config.batch_size;
  model.metadata["channels1"] = config.channels1;
  model.metadata["channels2"] = config.channels2;
  return model;
}

LabelMask cae_reconstruct(const CaeModel& model, const LabelMask& mask) {
  mask.validate();
  check_cae_mask(mask, model.input_size);
  nn::Tensor<float> logits = nn::forward(model.net, one_hot(mask));
  LabelMask out;
  out.width = mask.width;
  out.height = mask.height;
  out.spacing_mm = mask.spacing_mm;
  out.labels.resize(mask.labels.size());
  size_t plane = mask.labels.size();
  for (size_t p = 0; p < plane; ++p) {
    int best = 0;
    float best_v = logits.data[p];
    for (int c = 1; c < kNumClasses; ++c) {
      float v = logits.data[c * plane + p];
      if (v > best_v) {  // strict: ties keep the lowest class
        best_v = v;
        best = c;
      }
    }
    out.labels[p] = static_cast<uint8_t>(best);
  }
  return out;
}

CaeScore cae_score(const CaeModel& model, const LabelMask& mask) {
  LabelMask recon = cae_reconstruct(model, mask);
  int64_t diff = 0, fg_union = 0;
  for (size_t i = 0; i < mask.labels.size(); ++i) {
    uint8_t a = mask.labels[i], b = recon.labels[i];
    if (a != 0 || b != 0) {
      ++fg_union;
      diff += (a != b);
    }
  }
  if (fg_union == 0) return {1.0, false};  // degenerate mask
  double ratio = static_cast<double>(diff) / static_cast<double>(fg_union);
  return {ratio, ratio < model.tau};
}

void save_cae_model(const CaeModel& model, const std::filesystem::path& path) {
  nn::Checkpoint ck;
  ck.header["kind"] = "cae";
  ck.header["input_size"] = model.input_size;
  ck.header["tau"] = model.tau;
  ck.header["seed"] = model.seed;
  ck.header["metadata"] = model.metadata;
  nlohmann::json layers = nlohmann::json::array();
  for (const nn::LayerSpec& s : model.net.specs) layers.push_back(nn::layer_to_json(s));
  ck.header["nets"] = nlohmann::json::array({{{"layers", layers}, {"name", "net"}}});
  ck.header["layers"] = layers;
  ck.weights = nn::flatten_weights(model.net);
  save_checkpoint(ck, path);
}

CaeModel load_cae_model(const std::filesystem::path& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  CaeModel m;
  try {
    if (ck.header.at("kind").get<std::string>() != "cae") {
      throw DataError("checkpoint is not a cae model");
    }
    m.input_size = ck.header.at("input_size").get<int>();
    m.tau = ck.header.at("tau").get<double>();
    m.seed = ck.header.at("seed").get<uint64_t>();
    if (ck.header.contains("metadata")) m.metadata = ck.header["metadata"];
    const nlohmann::json& nets = ck.header.at("nets");
    if (!nets.is_array() || nets.size() != 1) {
      throw DataError("checkpoint header has malformed nets");
    }
    std::vector<nn::LayerSpec> specs;
    for (const nlohmann::json& lj : nets[0].at("layers")) {
      specs.push_back(nn::layer_from_json(lj));
    }
    m.net = nn::make_network_zero<float>(std::move(specs));
    nn::load_weights(m.net, ck.weights);
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint header is missing cae fields");
  }
  return m;
}

}  // namespace fusqa
