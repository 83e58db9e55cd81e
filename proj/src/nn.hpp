#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "errors.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace fusqa::nn {

/// Row-major tensor; [C,H,W] for feature maps, [N] for vectors.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  static Tensor zeros(std::vector<int> s) {
    Tensor t;
    int64_t n = 1;
    for (int d : s) n *= d;
    t.shape = std::move(s);
    t.data.assign(static_cast<size_t>(n), T(0));
    return t;
  }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  bool is_3d() const { return shape.size() == 3; }
};

/// Layer descriptions. Conv is fixed at 3x3, stride 1, pad 1; MaxPool at 2x2
/// stride 2; NearestUpsample doubles both spatial dims.
struct LayerSpec {
  enum class Kind { Conv2d, ReLU, MaxPool, GlobalAvgPool, FullyConnected, Sigmoid, NearestUpsample };
  Kind kind = Kind::ReLU;
  int in_ch = 0, out_ch = 0;   // Conv2d
  int in_dim = 0, out_dim = 0; // FullyConnected

  bool operator==(const LayerSpec&) const = default;

  static LayerSpec conv(int in_ch, int out_ch) {
    return {Kind::Conv2d, in_ch, out_ch, 0, 0};
  }
  static LayerSpec relu() { return {Kind::ReLU, 0, 0, 0, 0}; }
  static LayerSpec maxpool() { return {Kind::MaxPool, 0, 0, 0, 0}; }
  static LayerSpec gap() { return {Kind::GlobalAvgPool, 0, 0, 0, 0}; }
  static LayerSpec fc(int in_dim, int out_dim) {
    return {Kind::FullyConnected, 0, 0, in_dim, out_dim};
  }
  static LayerSpec sigmoid() { return {Kind::Sigmoid, 0, 0, 0, 0}; }
  static LayerSpec upsample() { return {Kind::NearestUpsample, 0, 0, 0, 0}; }
};

/// Number of scalar parameters a layer contributes to a checkpoint.
int64_t param_count(const LayerSpec& spec);

nlohmann::json layer_to_json(const LayerSpec& spec);
LayerSpec layer_from_json(const nlohmann::json& j);

/// Weights (and bias) for one layer; empty tensors for parameterless layers.
template <typename T>
struct LayerState {
  Tensor<T> w;
  Tensor<T> b;
};

template <typename T>
struct Network {
  std::vector<LayerSpec> specs;
  std::vector<LayerState<T>> layers;  // parallel to specs
};

namespace detail {
[[noreturn]] inline void shape_error(size_t layer_index) {
  throw UsageError("shape mismatch at layer " + std::to_string(layer_index));
}
}  // namespace detail

/// He-style initialization: zero-mean normals scaled by sqrt(2 / fan_in),
/// biases zero, drawn in declaration order from the given seed.
template <typename T>
Network<T> make_network(std::vector<LayerSpec> specs, uint64_t seed) {
  Network<T> net;
  net.specs = std::move(specs);
  net.layers.resize(net.specs.size());
  Rng rng(seed);
  for (size_t i = 0; i < net.specs.size(); ++i) {
    const LayerSpec& s = net.specs[i];
    LayerState<T>& st = net.layers[i];
    if (s.kind == LayerSpec::Kind::Conv2d) {
      if (s.in_ch < 1 || s.out_ch < 1) detail::shape_error(i);
      st.w = Tensor<T>::zeros({s.out_ch, s.in_ch, 3, 3});
      st.b = Tensor<T>::zeros({s.out_ch});
      double scale = std::sqrt(2.0 / (9.0 * s.in_ch));
      for (T& v : st.w.data) v = static_cast<T>(rng.normal() * scale);
    } else if (s.kind == LayerSpec::Kind::FullyConnected) {
      if (s.in_dim < 1 || s.out_dim < 1) detail::shape_error(i);
      st.w = Tensor<T>::zeros({s.out_dim, s.in_dim});
      st.b = Tensor<T>::zeros({s.out_dim});
      double scale = std::sqrt(2.0 / s.in_dim);
      for (T& v : st.w.data) v = static_cast<T>(rng.normal() * scale);
    }
  }
  return net;
}

/// Same structure as make_network but with all-zero weights; used when a
/// checkpoint is about to overwrite them.
template <typename T>
Network<T> make_network_zero(std::vector<LayerSpec> specs) {
  Network<T> net = make_network<T>(std::move(specs), 0);
  for (LayerState<T>& l : net.layers) {
    std::fill(l.w.data.begin(), l.w.data.end(), T(0));
  }
  return net;
}

template <typename T>
struct ForwardCache {
  std::vector<Tensor<T>> inputs;            // input seen by each layer
  std::vector<std::vector<int32_t>> pool_arg; // argmax per MaxPool layer (flat in-index)
  Tensor<T> output;
};

template <typename T>
Tensor<T> forward(const Network<T>& net, const Tensor<T>& input,
                  ForwardCache<T>* cache = nullptr) {
  using Kind = LayerSpec::Kind;
  if (cache) {
    cache->inputs.clear();
    cache->pool_arg.assign(net.specs.size(), {});
  }
  Tensor<T> x = input;
  for (size_t i = 0; i < net.specs.size(); ++i) {
    const LayerSpec& s = net.specs[i];
    const LayerState<T>& st = net.layers[i];
    if (cache) cache->inputs.push_back(x);
    switch (s.kind) {
      case Kind::Conv2d: {
        if (!x.is_3d() || x.shape[0] != s.in_ch) detail::shape_error(i);
        int h = x.shape[1], w = x.shape[2];
        Tensor<T> y = Tensor<T>::zeros({s.out_ch, h, w});
        for (int oc = 0; oc < s.out_ch; ++oc) {
          T* out_plane = y.data.data() + static_cast<size_t>(oc) * h * w;
          for (int64_t p = 0; p < static_cast<int64_t>(h) * w; ++p) {
            out_plane[p] = st.b.data[oc];
          }
          for (int ic = 0; ic < s.in_ch; ++ic) {
            const T* in_plane = x.data.data() + static_cast<size_t>(ic) * h * w;
            const T* k = st.w.data.data() +
                         (static_cast<size_t>(oc) * s.in_ch + ic) * 9;
            for (int yy = 0; yy < h; ++yy) {
              int y0 = std::max(0, yy - 1), y1 = std::min(h - 1, yy + 1);
              for (int xx = 0; xx < w; ++xx) {
                int x0 = std::max(0, xx - 1), x1 = std::min(w - 1, xx + 1);
                T acc = 0;
                for (int sy = y0; sy <= y1; ++sy) {
                  const T* row = in_plane + static_cast<size_t>(sy) * w;
                  const T* krow = k + (sy - yy + 1) * 3;
                  for (int sx = x0; sx <= x1; ++sx) {
                    acc += row[sx] * krow[sx - xx + 1];
                  }
                }
                out_plane[static_cast<size_t>(yy) * w + xx] += acc;
              }
            }
          }
        }
        x = std::move(y);
        break;
      }
      case Kind::ReLU: {
        for (T& v : x.data) v = v > T(0) ? v : T(0);
        break;
      }
      case Kind::MaxPool: {
        if (!x.is_3d() || x.shape[1] % 2 != 0 || x.shape[2] % 2 != 0) {
          detail::shape_error(i);
        }
        int c = x.shape[0], h = x.shape[1], w = x.shape[2];
        int oh = h / 2, ow = w / 2;
        Tensor<T> y = Tensor<T>::zeros({c, oh, ow});
        std::vector<int32_t> arg(y.data.size());
        for (int ch = 0; ch < c; ++ch) {
          const T* in_plane = x.data.data() + static_cast<size_t>(ch) * h * w;
          T* out_plane = y.data.data() + static_cast<size_t>(ch) * oh * ow;
          int32_t* arg_plane = arg.data() + static_cast<size_t>(ch) * oh * ow;
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              int base = 2 * oy * w + 2 * ox;
              int best = base;
              T best_v = in_plane[base];
              for (int d : {1, w, w + 1}) {
                if (in_plane[base + d] > best_v) {
                  best_v = in_plane[base + d];
                  best = base + d;
                }
              }
              out_plane[static_cast<size_t>(oy) * ow + ox] = best_v;
              arg_plane[static_cast<size_t>(oy) * ow + ox] = best;
            }
          }
        }
        if (cache) cache->pool_arg[i] = std::move(arg);
        x = std::move(y);
        break;
      }
      case Kind::GlobalAvgPool: {
        if (!x.is_3d()) detail::shape_error(i);
        int c = x.shape[0];
        int64_t hw = static_cast<int64_t>(x.shape[1]) * x.shape[2];
        Tensor<T> y = Tensor<T>::zeros({c});
        for (int ch = 0; ch < c; ++ch) {
          T acc = 0;
          const T* plane = x.data.data() + static_cast<size_t>(ch) * hw;
          for (int64_t p = 0; p < hw; ++p) acc += plane[p];
          y.data[ch] = acc / static_cast<T>(hw);
        }
        x = std::move(y);
        break;
      }
      case Kind::FullyConnected: {
        if (x.numel() != s.in_dim) detail::shape_error(i);
        Tensor<T> y = Tensor<T>::zeros({s.out_dim});
        for (int o = 0; o < s.out_dim; ++o) {
          T acc = st.b.data[o];
          const T* row = st.w.data.data() + static_cast<size_t>(o) * s.in_dim;
          for (int in = 0; in < s.in_dim; ++in) acc += row[in] * x.data[in];
          y.data[o] = acc;
        }
        x = std::move(y);
        break;
      }
      case Kind::Sigmoid: {
        for (T& v : x.data) v = T(1) / (T(1) + std::exp(-v));
        break;
      }
      case Kind::NearestUpsample: {
        if (!x.is_3d()) detail::shape_error(i);
        int c = x.shape[0], h = x.shape[1], w = x.shape[2];
        Tensor<T> y = Tensor<T>::zeros({c, 2 * h, 2 * w});
        for (int ch = 0; ch < c; ++ch) {
          const T* in_plane = x.data.data() + static_cast<size_t>(ch) * h * w;
          T* out_plane = y.data.data() + static_cast<size_t>(ch) * 4 * h * w;
          for (int yy = 0; yy < h; ++yy) {
            for (int xx = 0; xx < w; ++xx) {
              T v = in_plane[static_cast<size_t>(yy) * w + xx];
              size_t o = static_cast<size_t>(2 * yy) * 2 * w + 2 * xx;
              out_plane[o] = v;
              out_plane[o + 1] = v;
              out_plane[o + 2 * w] = v;
              out_plane[o + 2 * w + 1] = v;
            }
          }
        }
        x = std::move(y);
        break;
      }
    }
  }
  if (cache) cache->output = x;
  return x;
}

template <typename T>
struct Gradients {
  std::vector<LayerState<T>> layers;  // same shapes as the network's weights
  Tensor<T> input_grad;
};

/// Exact analytic gradients; ReLU subgradient at 0 is 0. upstream_grad is
/// dLoss/dOutput for the network's final output.
template <typename T>
Gradients<T> backward(const Network<T>& net, const ForwardCache<T>& cache,
                      const Tensor<T>& upstream_grad) {
  using Kind = LayerSpec::Kind;
  if (cache.inputs.size() != net.specs.size()) {
    throw UsageError("backward called without a matching forward cache");
  }
  Gradients<T> g;
  g.layers.resize(net.specs.size());
  Tensor<T> d = upstream_grad;
  for (size_t idx = net.specs.size(); idx-- > 0;) {
    const LayerSpec& s = net.specs[idx];
    const LayerState<T>& st = net.layers[idx];
    const Tensor<T>& in = cache.inputs[idx];
    switch (s.kind) {
      case Kind::Conv2d: {
        int h = in.shape[1], w = in.shape[2];
        LayerState<T>& lg = g.layers[idx];
        lg.w = Tensor<T>::zeros(st.w.shape);
        lg.b = Tensor<T>::zeros(st.b.shape);
        Tensor<T> dx = Tensor<T>::zeros(in.shape);
        for (int oc = 0; oc < s.out_ch; ++oc) {
          const T* d_plane = d.data.data() + static_cast<size_t>(oc) * h * w;
          T bacc = 0;
          for (int64_t p = 0; p < static_cast<int64_t>(h) * w; ++p) bacc += d_plane[p];
          lg.b.data[oc] = bacc;
          for (int ic = 0; ic < s.in_ch; ++ic) {
            const T* in_plane = in.data.data() + static_cast<size_t>(ic) * h * w;
            T* dx_plane = dx.data.data() + static_cast<size_t>(ic) * h * w;
            const T* k = st.w.data.data() + (static_cast<size_t>(oc) * s.in_ch + ic) * 9;
            T* gk = lg.w.data.data() + (static_cast<size_t>(oc) * s.in_ch + ic) * 9;
            for (int yy = 0; yy < h; ++yy) {
              int y0 = std::max(0, yy - 1), y1 = std::min(h - 1, yy + 1);
              for (int xx = 0; xx < w; ++xx) {
                int x0 = std::max(0, xx - 1), x1 = std::min(w - 1, xx + 1);
                T dv = d_plane[static_cast<size_t>(yy) * w + xx];
                if (dv == T(0)) continue;
                for (int sy = y0; sy <= y1; ++sy) {
                  const T* in_row = in_plane + static_cast<size_t>(sy) * w;
                  T* dx_row = dx_plane + static_cast<size_t>(sy) * w;
                  int kr = (sy - yy + 1) * 3;
                  for (int sx = x0; sx <= x1; ++sx) {
                    int kc = kr + (sx - xx + 1);
                    gk[kc] += in_row[sx] * dv;
                    dx_row[sx] += k[kc] * dv;
                  }
                }
              }
            }
          }
        }
        d = std::move(dx);
        break;
      }
      case Kind::ReLU: {
        for (size_t p = 0; p < d.data.size(); ++p) {
          if (in.data[p] <= T(0)) d.data[p] = T(0);
        }
        break;
      }
      case Kind::MaxPool: {
        Tensor<T> dx = Tensor<T>::zeros(in.shape);
        const std::vector<int32_t>& arg = cache.pool_arg[idx];
        int c = in.shape[0];
        int64_t in_hw = static_cast<int64_t>(in.shape[1]) * in.shape[2];
        int64_t out_hw = static_cast<int64_t>(d.data.size()) / c;
        for (int ch = 0; ch < c; ++ch) {
          T* dx_plane = dx.data.data() + static_cast<size_t>(ch) * in_hw;
          const T* d_plane = d.data.data() + static_cast<size_t>(ch) * out_hw;
          const int32_t* arg_plane = arg.data() + static_cast<size_t>(ch) * out_hw;
          for (int64_t p = 0; p < out_hw; ++p) dx_plane[arg_plane[p]] += d_plane[p];
        }
        d = std::move(dx);
        break;
      }
      case Kind::GlobalAvgPool: {
        Tensor<T> dx = Tensor<T>::zeros(in.shape);
        int c = in.shape[0];
        int64_t hw = static_cast<int64_t>(in.shape[1]) * in.shape[2];
        for (int ch = 0; ch < c; ++ch) {
          T v = d.data[ch] / static_cast<T>(hw);
          T* plane = dx.data.data() + static_cast<size_t>(ch) * hw;
          for (int64_t p = 0; p < hw; ++p) plane[p] = v;
        }
        d = std::move(dx);
        break;
      }
      case Kind::FullyConnected: {
        LayerState<T>& lg = g.layers[idx];
        lg.w = Tensor<T>::zeros(st.w.shape);
        lg.b = Tensor<T>::zeros(st.b.shape);
        Tensor<T> dx = Tensor<T>::zeros(in.shape);
        for (int o = 0; o < s.out_dim; ++o) {
          T dv = d.data[o];
          lg.b.data[o] = dv;
          const T* wrow = st.w.data.data() + static_cast<size_t>(o) * s.in_dim;
          T* grow = lg.w.data.data() + static_cast<size_t>(o) * s.in_dim;
          for (int i2 = 0; i2 < s.in_dim; ++i2) {
            grow[i2] = in.data[i2] * dv;
            dx.data[i2] += wrow[i2] * dv;
          }
        }
        d = std::move(dx);
        break;
      }
      case Kind::Sigmoid: {
        // d/dz sigmoid = s(1-s); recompute s from the cached input.
        for (size_t p = 0; p < d.data.size(); ++p) {
          T sv = T(1) / (T(1) + std::exp(-in.data[p]));
          d.data[p] *= sv * (T(1) - sv);
        }
        break;
      }
      case Kind::NearestUpsample: {
        Tensor<T> dx = Tensor<T>::zeros(in.shape);
        int c = in.shape[0], h = in.shape[1], w = in.shape[2];
        for (int ch = 0; ch < c; ++ch) {
          T* dx_plane = dx.data.data() + static_cast<size_t>(ch) * h * w;
          const T* d_plane = d.data.data() + static_cast<size_t>(ch) * 4 * h * w;
          for (int yy = 0; yy < h; ++yy) {
            for (int xx = 0; xx < w; ++xx) {
              size_t o = static_cast<size_t>(2 * yy) * 2 * w + 2 * xx;
              dx_plane[static_cast<size_t>(yy) * w + xx] =
                  d_plane[o] + d_plane[o + 1] + d_plane[o + 2 * w] +
                  d_plane[o + 2 * w + 1];
            }
          }
        }
        d = std::move(dx);
        break;
      }
    }
  }
  g.input_grad = std::move(d);
  return g;
}

/// Accumulate rhs into lhs (allocating on first use); used for batch means.
template <typename T>
void accumulate(Gradients<T>& lhs, const Gradients<T>& rhs) {
  if (lhs.layers.empty()) {
    lhs = rhs;
    return;
  }
  if (lhs.layers.size() != rhs.layers.size()) {
    throw UsageError("gradient accumulation across different networks");
  }
  for (size_t i = 0; i < lhs.layers.size(); ++i) {
    for (size_t j = 0; j < lhs.layers[i].w.data.size(); ++j) {
      lhs.layers[i].w.data[j] += rhs.layers[i].w.data[j];
    }
    for (size_t j = 0; j < lhs.layers[i].b.data.size(); ++j) {
      lhs.layers[i].b.data[j] += rhs.layers[i].b.data[j];
    }
  }
}

template <typename T>
void scale_gradients(Gradients<T>& g, T factor) {
  for (LayerState<T>& l : g.layers) {
    for (T& v : l.w.data) v *= factor;
    for (T& v : l.b.data) v *= factor;
  }
}

/// SGD with momentum: v <- momentum*v + g; w <- w - lr*v.
template <typename T>
struct SgdState {
  std::vector<LayerState<T>> velocity;
};

template <typename T>
void sgd_step(Network<T>& net, const Gradients<T>& g, SgdState<T>& state,
              T lr, T momentum) {
  if (!(lr > T(0)) || !(momentum >= T(0) && momentum < T(1))) {
    throw UsageError("sgd_step requires lr > 0 and momentum in [0,1)");
  }
  if (state.velocity.empty()) {
    state.velocity.resize(net.layers.size());
    for (size_t i = 0; i < net.layers.size(); ++i) {
      state.velocity[i].w = Tensor<T>::zeros(net.layers[i].w.shape);
      state.velocity[i].b = Tensor<T>::zeros(net.layers[i].b.shape);
    }
  }
  for (size_t i = 0; i < net.layers.size(); ++i) {
    auto step = [&](Tensor<T>& w, Tensor<T>& v, const Tensor<T>& grad) {
      for (size_t j = 0; j < w.data.size(); ++j) {
        v.data[j] = momentum * v.data[j] + grad.data[j];
        w.data[j] -= lr * v.data[j];
      }
    };
    step(net.layers[i].w, state.velocity[i].w, g.layers[i].w);
    step(net.layers[i].b, state.velocity[i].b, g.layers[i].b);
  }
}

/// Binary cross entropy with probability clamped to [eps, 1-eps], eps = 1e-7.
template <typename T>
T bce_loss(T p, int y) {
  if (y != 0 && y != 1) throw UsageError("bce label must be 0 or 1");
  const T eps = static_cast<T>(1e-7);
  T q = std::min(T(1) - eps, std::max(eps, p));
  return -(y == 1 ? std::log(q) : std::log(T(1) - q));
}

/// dLoss/dp for clamped BCE; pairs with a trailing Sigmoid layer.
template <typename T>
T bce_grad(T p, int y) {
  if (y != 0 && y != 1) throw UsageError("bce label must be 0 or 1");
  const T eps = static_cast<T>(1e-7);
  T q = std::min(T(1) - eps, std::max(eps, p));
  return (y == 1 ? -T(1) / q : T(1) / (T(1) - q));
}

template <typename T>
T sigmoid_scalar(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

/// Flat parameter vector in declaration order (layer by layer, weights then
/// bias) — the checkpoint payload order.
template <typename T>
std::vector<float> flatten_weights(const Network<T>& net) {
  std::vector<float> out;
  for (const LayerState<T>& l : net.layers) {
    for (T v : l.w.data) out.push_back(static_cast<float>(v));
    for (T v : l.b.data) out.push_back(static_cast<float>(v));
  }
  return out;
}

template <typename T>
void load_weights(Network<T>& net, const std::vector<float>& flat) {
  size_t needed = 0;
  for (const LayerState<T>& l : net.layers) {
    needed += l.w.data.size() + l.b.data.size();
  }
  if (needed != flat.size()) {
    throw DataError("checkpoint weight count mismatch");
  }
  size_t pos = 0;
  for (LayerState<T>& l : net.layers) {
    for (T& v : l.w.data) v = static_cast<T>(flat[pos++]);
    for (T& v : l.b.data) v = static_cast<T>(flat[pos++]);
  }
}

/// On-disk checkpoint: magic "FQM1", u32 LE version, u32 LE header length,
/// JSON header, then raw f32 LE weights in declaration order.
struct Checkpoint {
  nlohmann::json header;
  std::vector<float> weights;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fusqa::nn
