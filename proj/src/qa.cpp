#include "qa.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errors.hpp"
#include "parallel.hpp"
#include "transform.hpp"

namespace fusqa {

namespace {

constexpr int kLatentDim = 32;

std::vector<nn::LayerSpec> encoder_specs() {
  using L = nn::LayerSpec;
  return {L::conv(3, 8),  L::relu(), L::maxpool(),
          L::conv(8, 16), L::relu(), L::maxpool(),
          L::conv(16, 32), L::relu(), L::maxpool(),
          L::gap()};
}

std::vector<nn::LayerSpec> head_specs(Topology t) {
  int in = t == Topology::Single ? kLatentDim : 2 * kLatentDim;
  return {nn::LayerSpec::fc(in, 1)};
}

void check_pair_size(const GrayImage& image, const LabelMask& mask, int size) {
  if (image.width != size || image.height != size || mask.width != size ||
      mask.height != size) {
    throw UsageError("size mismatch: model expects " + std::to_string(size) +
                     "x" + std::to_string(size) + " image/mask pairs");
  }
}

nn::Tensor<float> stack3(const std::vector<float>& c0, const std::vector<float>& c1,
                         const std::vector<float>& c2, int h, int w) {
  nn::Tensor<float> t = nn::Tensor<float>::zeros({3, h, w});
  std::copy(c0.begin(), c0.end(), t.data.begin());
  std::copy(c1.begin(), c1.end(), t.data.begin() + c0.size());
  std::copy(c2.begin(), c2.end(), t.data.begin() + 2 * c0.size());
  return t;
}

std::vector<float> mask_channel(const LabelMask& mask) {
  std::vector<float> out(mask.labels.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(mask.labels[i]) / 4.0f;
  }
  return out;
}

// Per-sample training work product; reduced sequentially in sample order.
struct SampleGrads {
  nn::Gradients<float> enc_a;
  nn::Gradients<float> enc_b;
  nn::Gradients<float> head;
  double loss = 0.0;
  bool correct = false;
};

// Forward + backward for one (already augmented) pair. For Siamese both
// branches run the shared encoder and their gradients are summed.
SampleGrads sample_pass(const QaModel& model, const GrayImage& image,
                        const LabelMask& mask, int label) {
  SampleGrads out;
  std::vector<nn::Tensor<float>> inputs = assemble_input(image, mask, model.topology);
  float z = 0.0f;
  nn::ForwardCache<float> cache_a, cache_b, cache_head;
  if (model.topology == Topology::Single) {
    nn::Tensor<float> latent = nn::forward(model.encoder_a, inputs[0], &cache_a);
    z = nn::forward(model.head, latent, &cache_head).data[0];
  } else {
    const nn::Network<float>& enc_b =
        model.topology == Topology::Siamese ? model.encoder_a : model.encoder_b;
    nn::Tensor<float> la = nn::forward(model.encoder_a, inputs[0], &cache_a);
    nn::Tensor<float> lb = nn::forward(enc_b, inputs[1], &cache_b);
    nn::Tensor<float> joint = nn::Tensor<float>::zeros({2 * kLatentDim});
    std::copy(la.data.begin(), la.data.end(), joint.data.begin());
    std::copy(lb.data.begin(), lb.data.end(), joint.data.begin() + kLatentDim);
    z = nn::forward(model.head, joint, &cache_head).data[0];
  }
  float p = nn::sigmoid_scalar(z);
  out.loss = nn::bce_loss(p, label);
  out.correct = (p >= 0.5f) == (label == 1);

  // Fused sigmoid+BCE gradient on the logit: dL/dz = p - y.
  nn::Tensor<float> dz = nn::Tensor<float>::zeros({1});
  dz.data[0] = p - static_cast<float>(label);
  out.head = nn::backward(model.head, cache_head, dz);
  if (model.topology == Topology::Single) {
    out.enc_a = nn::backward(model.encoder_a, cache_a, out.head.input_grad);
  } else {
    nn::Tensor<float> da = nn::Tensor<float>::zeros({kLatentDim});
    nn::Tensor<float> db = nn::Tensor<float>::zeros({kLatentDim});
    std::copy(out.head.input_grad.data.begin(),
              out.head.input_grad.data.begin() + kLatentDim, da.data.begin());
    std::copy(out.head.input_grad.data.begin() + kLatentDim,
              out.head.input_grad.data.end(), db.data.begin());
    if (model.topology == Topology::Siamese) {
      out.enc_a = nn::backward(model.encoder_a, cache_a, da);
      nn::Gradients<float> gb = nn::backward(model.encoder_a, cache_b, db);
      nn::accumulate(out.enc_a, gb);
    } else {
      out.enc_a = nn::backward(model.encoder_a, cache_a, da);
      out.enc_b = nn::backward(model.encoder_b, cache_b, db);
    }
  }
  return out;
}

struct EvalPoint {
  double loss = 0.0;
  bool correct = false;
};

// L2 regularization enters through the objective: the weight-gradient gains
// wd * w before the optimizer step. Biases are left undecayed. The image
// carries no good/poor signal of its own (all variants of a phantom share
// one render), so without decay the encoder keeps arbitrary image-sensitive
// weights that shift the logit under a domain change; decay prunes them.
void add_l2(nn::Gradients<float>& g, const nn::Network<float>& net, float wd) {
  if (wd == 0.0f) return;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    for (size_t j = 0; j < g.layers[i].w.data.size(); ++j) {
      g.layers[i].w.data[j] += wd * net.layers[i].w.data[j];
    }
  }
}

}  // namespace

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Single: return "single";
    case Topology::Siamese: return "siamese";
    case Topology::Synergic: return "synergic";
  }
  throw UsageError("unknown topology");
}

Topology topology_from_string(const std::string& text) {
  if (text == "single") return Topology::Single;
  if (text == "siamese") return Topology::Siamese;
  if (text == "synergic") return Topology::Synergic;
  throw UsageError("unknown topology: " + text +
                   " (expected single|siamese|synergic)");
}

std::vector<nn::Tensor<float>> assemble_input(const GrayImage& image,
                                              const LabelMask& mask,
                                              Topology topology) {
  if (image.width != mask.width || image.height != mask.height) {
    throw UsageError("size mismatch: image and mask dimensions differ");
  }
  std::vector<float> y = mask_channel(mask);
  if (topology == Topology::Single) {
    return {stack3(image.data, image.data, y, image.height, image.width)};
  }
  return {stack3(image.data, image.data, image.data, image.height, image.width),
          stack3(y, y, y, image.height, image.width)};
}

QaModel make_qa_model(Topology topology, int input_size, uint64_t seed) {
  if (input_size < 8 || input_size % 8 != 0) {
    throw UsageError("input size must be a positive multiple of 8");
  }
  QaModel m;
  m.topology = topology;
  m.input_size = input_size;
  m.seed = seed;
  m.encoder_a = nn::make_network<float>(encoder_specs(), derive_seed(seed, 1));
  if (topology == Topology::Synergic) {
    m.encoder_b = nn::make_network<float>(encoder_specs(), derive_seed(seed, 2));
  }
  m.head = nn::make_network<float>(head_specs(topology), derive_seed(seed, 3));
  return m;
}

double predict(const QaModel& model, const GrayImage& image, const LabelMask& mask) {
  check_pair_size(image, mask, model.input_size);
  std::vector<nn::Tensor<float>> inputs = assemble_input(image, mask, model.topology);
  float z = 0.0f;
  if (model.topology == Topology::Single) {
    z = nn::forward(model.head, nn::forward(model.encoder_a, inputs[0])).data[0];
  } else {
    const nn::Network<float>& enc_b =
        model.topology == Topology::Siamese ? model.encoder_a : model.encoder_b;
    nn::Tensor<float> la = nn::forward(model.encoder_a, inputs[0]);
    nn::Tensor<float> lb = nn::forward(enc_b, inputs[1]);
    nn::Tensor<float> joint = nn::Tensor<float>::zeros({2 * kLatentDim});
    std::copy(la.data.begin(), la.data.end(), joint.data.begin());
    std::copy(lb.data.begin(), lb.data.end(), joint.data.begin() + kLatentDim);
    z = nn::forward(model.head, joint).data[0];
  }
  return nn::sigmoid_scalar(z);
}

TrainResult train_qa(const std::vector<Sample>& dataset, Topology topology,
                     const TrainConfig& config, uint64_t seed) {
  if (dataset.empty()) throw DataError("degenerate labels");
  bool any_good = false, any_poor = false;
  for (const Sample& s : dataset) {
    (s.quality == 1 ? any_good : any_poor) = true;
  }
  if (!any_good || !any_poor) throw DataError("degenerate labels");
  int size = dataset[0].image.width;
  for (const Sample& s : dataset) {
    if (s.image.width != size || s.image.height != size ||
        s.mask.width != size || s.mask.height != size) {
      throw UsageError("size mismatch: dataset images must share one square size");
    }
  }
  if (size < 8 || size % 8 != 0) {
    throw UsageError("input size must be a positive multiple of 8");
  }
  if (config.epochs < 0 || config.batch_size < 1) {
    throw UsageError("train config requires epochs >= 0 and batch_size >= 1");
  }
  if (config.weight_decay < 0.0) {
    throw UsageError("train config requires weight_decay >= 0");
  }

  // 90/10 validation split at source-phantom level so variants of one
  // phantom never straddle the split.
  std::vector<std::string> sources;
  for (const Sample& s : dataset) {
    if (std::find(sources.begin(), sources.end(), s.source_id) == sources.end()) {
      sources.push_back(s.source_id);
    }
  }
  if (sources.size() < 2) {
    throw DataError("need at least two source phantoms for a validation split");
  }
  Rng split_rng(seed, 11);
  split_rng.shuffle(sources);
  size_t n_val_sources = std::max<size_t>(
      1, static_cast<size_t>(std::lround(0.1 * static_cast<double>(sources.size()))));
  n_val_sources = std::min(n_val_sources, sources.size() - 1);
  std::set<std::string> val_sources(sources.begin(), sources.begin() + n_val_sources);
  std::vector<int> train_idx, val_idx;
  for (size_t i = 0; i < dataset.size(); ++i) {
    (val_sources.count(dataset[i].source_id) ? val_idx : train_idx)
        .push_back(static_cast<int>(i));
  }

  TrainResult result;
  result.model = make_qa_model(topology, size, seed);
  QaModel& model = result.model;
  int threads = resolve_threads(config.threads);

  nn::SgdState<float> vel_a, vel_b, vel_head;
  float lr = static_cast<float>(config.lr);
  float momentum = static_cast<float>(config.momentum);

  QaModel best = model;
  double best_val_acc = -1.0;
  int best_epoch = -1;

  auto evaluate = [&](const std::vector<int>& idx) {
    std::vector<EvalPoint> points(idx.size());
    parallel_for(static_cast<int>(idx.size()), threads, [&](int i) {
      const Sample& s = dataset[static_cast<size_t>(idx[static_cast<size_t>(i)])];
      double p = predict(model, s.image, s.mask);
      points[static_cast<size_t>(i)].loss = nn::bce_loss(p, s.quality);
      points[static_cast<size_t>(i)].correct = (p >= 0.5) == (s.quality == 1);
    });
    double loss = 0.0;
    int64_t correct = 0;
    for (const EvalPoint& pt : points) {
      loss += pt.loss;
      correct += pt.correct;
    }
    double n = points.empty() ? 1.0 : static_cast<double>(points.size());
    return std::pair<double, double>(loss / n, static_cast<double>(correct) / n);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<int> order = train_idx;
    Rng order_rng(seed, 2000 + static_cast<uint64_t>(epoch));
    order_rng.shuffle(order);

    // Augmentation draws are precomputed sequentially (scale, flip, rotation
    // per sample in shuffled order) so batch parallelism cannot reorder them.
    Rng aug_rng(seed, 1000 + static_cast<uint64_t>(epoch));
    std::vector<TransformParams> params(order.size());
    for (TransformParams& tp : params) {
      if (config.augment) {
        tp.scale = aug_rng.uniform(0.9, 1.1);
        tp.hflip = aug_rng.bernoulli(0.5);
        tp.rotate_deg = aug_rng.uniform(-10.0, 10.0);
      }
    }

    double epoch_loss = 0.0;
    int64_t epoch_correct = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      size_t n = std::min(order.size() - start, static_cast<size_t>(config.batch_size));
      std::vector<SampleGrads> grads(n);
      parallel_for(static_cast<int>(n), threads, [&](int i) {
        const Sample& s = dataset[static_cast<size_t>(order[start + static_cast<size_t>(i)])];
        const TransformParams& tp = params[start + static_cast<size_t>(i)];
        if (config.augment) {
          auto [img, msk] = geometric_transform(s.image, s.mask, tp);
          grads[static_cast<size_t>(i)] = sample_pass(model, img, msk, s.quality);
        } else {
          grads[static_cast<size_t>(i)] = sample_pass(model, s.image, s.mask, s.quality);
        }
      });
      nn::Gradients<float> g_a, g_b, g_head;
      for (const SampleGrads& sg : grads) {  // fixed-order reduction
        nn::accumulate(g_a, sg.enc_a);
        if (topology == Topology::Synergic) nn::accumulate(g_b, sg.enc_b);
        nn::accumulate(g_head, sg.head);
        epoch_loss += sg.loss;
        epoch_correct += sg.correct;
      }
      float inv = 1.0f / static_cast<float>(n);
      float wd = static_cast<float>(config.weight_decay);
      nn::scale_gradients(g_a, inv);
      nn::scale_gradients(g_head, inv);
      add_l2(g_a, model.encoder_a, wd);
      add_l2(g_head, model.head, wd);
      nn::sgd_step(model.encoder_a, g_a, vel_a, lr, momentum);
      if (topology == Topology::Synergic) {
        nn::scale_gradients(g_b, inv);
        add_l2(g_b, model.encoder_b, wd);
        nn::sgd_step(model.encoder_b, g_b, vel_b, lr, momentum);
      }
      nn::sgd_step(model.head, g_head, vel_head, lr, momentum);
    }

    EpochStats stats;
    double n_train = order.empty() ? 1.0 : static_cast<double>(order.size());
    stats.train_loss = epoch_loss / n_train;
    stats.train_accuracy = static_cast<double>(epoch_correct) / n_train;
    auto [val_loss, val_acc] = evaluate(val_idx);
    stats.val_loss = val_loss;
    stats.val_accuracy = val_acc;
    result.history.push_back(stats);
    if (val_acc > best_val_acc) {  // strict: ties keep the earliest epoch
      best_val_acc = val_acc;
      best = model;
      best_epoch = epoch;
    }
  }

  if (best_epoch >= 0) result.model = best;
  result.best_epoch = best_epoch;
  result.model.metadata["epochs"] = config.epochs;
  result.model.metadata["lr"] = config.lr;
  result.model.metadata["momentum"] = config.momentum;
  result.model.metadata["weight_decay"] = config.weight_decay;
  result.model.metadata["batch_size"] = config.batch_size;
  result.model.metadata["augment"] = config.augment;
  result.model.metadata["best_epoch"] = best_epoch;
  result.model.metadata["best_val_accuracy"] = best_val_acc;
  return result;
}

void save_qa_model(const QaModel& model, const std::filesystem::path& path) {
  nn::Checkpoint ck;
  ck.header["kind"] = "qa";
  ck.header["topology"] = to_string(model.topology);
  ck.header["input_size"] = model.input_size;
  ck.header["seed"] = model.seed;
  ck.header["metadata"] = model.metadata;
  nlohmann::json nets = nlohmann::json::array();
  nlohmann::json flat = nlohmann::json::array();
  auto add_net = [&](const std::string& name, const nn::Network<float>& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const nn::LayerSpec& s : net.specs) {
      layers.push_back(nn::layer_to_json(s));
      flat.push_back(nn::layer_to_json(s));
    }
    nets.push_back({{"layers", layers}, {"name", name}});
    for (float w : nn::flatten_weights(net)) ck.weights.push_back(w);
  };
  add_net(model.topology == Topology::Synergic ? "encoder_a" : "encoder",
          model.encoder_a);
  if (model.topology == Topology::Synergic) add_net("encoder_b", model.encoder_b);
  add_net("head", model.head);
  ck.header["nets"] = std::move(nets);
  ck.header["layers"] = std::move(flat);
  save_checkpoint(ck, path);
}

QaModel load_qa_model(const std::filesystem::path& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  QaModel m;
  try {
    if (ck.header.at("kind").get<std::string>() != "qa") {
      throw DataError("checkpoint is not a qa model");
    }
    m.topology = topology_from_string(ck.header.at("topology").get<std::string>());
    m.input_size = ck.header.at("input_size").get<int>();
    m.seed = ck.header.at("seed").get<uint64_t>();
    if (ck.header.contains("metadata")) m.metadata = ck.header["metadata"];
    const nlohmann::json& nets = ck.header.at("nets");
    size_t expected = m.topology == Topology::Synergic ? 3 : 2;
    if (!nets.is_array() || nets.size() != expected) {
      throw DataError("checkpoint header has malformed nets");
    }
    size_t offset = 0;
    auto take_net = [&](const nlohmann::json& net_json) {
      std::vector<nn::LayerSpec> specs;
      int64_t count = 0;
      for (const nlohmann::json& lj : net_json.at("layers")) {
        specs.push_back(nn::layer_from_json(lj));
        count += nn::param_count(specs.back());
      }
      if (offset + static_cast<size_t>(count) > ck.weights.size()) {
        throw DataError("checkpoint weight count mismatch");
      }
      nn::Network<float> net = nn::make_network_zero<float>(std::move(specs));
      std::vector<float> slice(ck.weights.begin() + static_cast<ptrdiff_t>(offset),
                               ck.weights.begin() + static_cast<ptrdiff_t>(offset + static_cast<size_t>(count)));
      nn::load_weights(net, slice);
      offset += static_cast<size_t>(count);
      return net;
    };
    m.encoder_a = take_net(nets[0]);
    if (m.topology == Topology::Synergic) {
      m.encoder_b = take_net(nets[1]);
      m.head = take_net(nets[2]);
    } else {
      m.head = take_net(nets[1]);
    }
    if (offset != ck.weights.size()) {
      throw DataError("checkpoint weight count mismatch");
    }
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint header is missing qa fields");
  }
  return m;
}

}  // namespace fusqa
