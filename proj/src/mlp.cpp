// Copyright 2026 The Horouf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "horouf/mlp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "horouf/error.hpp"
#include "horouf/rng.hpp"

namespace horouf {

namespace {

std::atomic<std::uint64_t> g_stamp{1};

std::uint64_t fresh_stamp() { return g_stamp.fetch_add(1, std::memory_order_relaxed); }

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) {
    throw Error(Errc::ShapeMismatch, std::to_string(labels.size()) + " labels for " +
                                         std::to_string(rows) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(classes) + ")");
    }
  }
}

// out = in W + b, accumulated in double.
template <typename T>
Matrix<T> affine(const Matrix<T>& in, const DenseLayer<T>& layer) {
  const std::size_t n_in = layer.fan_in();
  const std::size_t n_out = layer.fan_out();
  Matrix<T> out(in.rows(), n_out);
  std::vector<double> acc(n_out);
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const T* x = in.row(i).data();
    for (std::size_t o = 0; o < n_out; ++o) acc[o] = layer.bias[o];
    for (std::size_t k = 0; k < n_in; ++k) {
      const double xv = x[k];
      const T* w = layer.weight.row(k).data();
      for (std::size_t o = 0; o < n_out; ++o) acc[o] += xv * static_cast<double>(w[o]);
    }
    T* y = out.row(i).data();
    for (std::size_t o = 0; o < n_out; ++o) y[o] = static_cast<T>(acc[o]);
  }
  return out;
}

}  // namespace

template <typename T>
Mlp<T>::Mlp(std::vector<std::size_t> widths, double dropout, std::uint64_t init_seed)
    : dropout_(dropout), stamp_(fresh_stamp()) {
  if (widths.size() < 2) throw Error(Errc::ShapeMismatch, "need at least input and output widths");
  Rng rng(init_seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l], fan_out = widths[l + 1];
    if (fan_in == 0 || fan_out == 0) throw Error(Errc::ShapeMismatch, "zero layer width");
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer<T> layer{Matrix<T>(fan_in, fan_out), std::vector<T>(fan_out)};
    for (auto& w : layer.weight.values()) w = static_cast<T>(rng.uniform(-bound, bound));
    for (auto& b : layer.bias) b = static_cast<T>(rng.uniform(-bound, bound));
    layers_.push_back(std::move(layer));
  }
  check_shapes();
}

template <typename T>
Mlp<T>::Mlp(std::vector<DenseLayer<T>> layers, double dropout)
    : layers_(std::move(layers)), dropout_(dropout), stamp_(fresh_stamp()) {
  check_shapes();
}

template <typename T>
Mlp<T> Mlp<T>::classifier(std::size_t input_dim, std::size_t num_classes, std::uint64_t init_seed) {
  return Mlp({input_dim, 256, 128, num_classes}, 0.3, init_seed);
}

template <typename T>
void Mlp<T>::check_shapes() const {
  if (layers_.empty()) throw Error(Errc::ShapeMismatch, "model has no layers");
  if (!(dropout_ >= 0.0 && dropout_ < 1.0)) throw Error(Errc::InvalidSpec, "dropout must be in [0, 1)");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.fan_in() == 0 || layer.fan_out() == 0 || layer.bias.size() != layer.fan_out()) {
      throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + " is malformed");
    }
    if (l > 0 && layers_[l - 1].fan_out() != layer.fan_in()) {
      throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + " does not chain");
    }
  }
}

template <typename T>
std::vector<std::size_t> Mlp<T>::widths() const {
  std::vector<std::size_t> w{input_dim()};
  for (const auto& layer : layers_) w.push_back(layer.fan_out());
  return w;
}

template <typename T>
std::size_t Mlp<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

template <typename T>
std::vector<DenseLayer<T>>& Mlp<T>::mutable_layers() {
  stamp_ = fresh_stamp();
  return layers_;
}

template <typename T>
ForwardTrace<T> Mlp<T>::forward(const Matrix<T>& x, Mode mode, std::uint64_t seed) const {
  if (x.cols() != input_dim()) {
    throw Error(Errc::ShapeMismatch, "input width " + std::to_string(x.cols()) + ", model expects " +
                                         std::to_string(input_dim()));
  }
  ForwardTrace<T> trace;
  trace.mode = mode;
  trace.stamp = stamp_;
  trace.inputs.reserve(layers_.size());
  trace.inputs.push_back(x);

  const bool drop = mode == Mode::Train && dropout_ > 0.0;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - dropout_));
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    Matrix<T> z = affine(trace.inputs.back(), layers_[l]);
    Matrix<T> a(z.rows(), z.cols());
    Matrix<T> mask;
    if (drop) {
      mask = Matrix<T>(z.rows(), z.cols());
      for (auto& m : mask.values()) m = rng.bernoulli(dropout_) ? T{0} : keep_scale;
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
      // NaN passes through so non-finite parameters surface in the loss.
      const T zv = z.values()[i];
      T v = (zv > T{0} || std::isnan(zv)) ? zv : T{0};
      if (drop) v *= mask.values()[i];
      a.values()[i] = v;
    }
    trace.pre_activations.push_back(std::move(z));
    if (drop) trace.masks.push_back(std::move(mask));
    trace.inputs.push_back(std::move(a));
  }
  trace.logits = affine(trace.inputs.back(), layers_.back());
  return trace;
}

template <typename T>
Matrix<T> Mlp<T>::predict_logits(const Matrix<T>& x) const {
  return forward(x, Mode::Eval).logits;
}

template <typename T>
Gradients<T> Mlp<T>::backward(const ForwardTrace<T>& trace, std::span<const int> labels,
                              Reduction reduction) const {
  if (trace.stamp != stamp_) throw Error(Errc::StaleTrace, "model changed since forward pass");
  if (trace.inputs.size() != layers_.size()) throw Error(Errc::StaleTrace, "trace does not match model");
  const std::size_t batch = trace.logits.rows();
  const std::size_t classes = num_classes();
  check_labels(labels, batch, classes);

  // dL/dlogits = softmax - onehot, scaled by the reduction.
  const double scale = reduction == Reduction::Mean ? 1.0 / static_cast<double>(batch) : 1.0;
  Matrix<double> delta = softmax_rows(trace.logits);
  for (std::size_t i = 0; i < batch; ++i) {
    delta(i, static_cast<std::size_t>(labels[i])) -= 1.0;
    for (auto& d : delta.row(i)) d *= scale;
  }

  Gradients<T> grads;
  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());
  const bool dropped = !trace.masks.empty();

  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const auto& in = trace.inputs[l];
    const std::size_t n_in = layer.fan_in(), n_out = layer.fan_out();

    Matrix<double> dw(n_in, n_out, 0.0);
    std::vector<double> db(n_out, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
      const double* d = delta.row(i).data();
      for (std::size_t o = 0; o < n_out; ++o) db[o] += d[o];
      const T* a = in.row(i).data();
      for (std::size_t k = 0; k < n_in; ++k) {
        const double av = a[k];
        if (av == 0.0) continue;
        double* g = dw.row(k).data();
        for (std::size_t o = 0; o < n_out; ++o) g[o] += av * d[o];
      }
    }
    grads.weight[l] = dw.cast<T>();
    grads.bias[l].assign(db.begin(), db.end());

    // Gradient with respect to this layer's input, via a transposed copy of W.
    Matrix<double> wt(n_out, n_in);
    for (std::size_t k = 0; k < n_in; ++k) {
      for (std::size_t o = 0; o < n_out; ++o) wt(o, k) = layer.weight(k, o);
    }
    Matrix<double> din(batch, n_in, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
      const double* d = delta.row(i).data();
      double* g = din.row(i).data();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        const double* w = wt.row(o).data();
        for (std::size_t k = 0; k < n_in; ++k) g[k] += dv * w[k];
      }
    }

    if (l == 0) {
      grads.input = din.cast<T>();
      break;
    }
    // Back through dropout and ReLU of hidden layer l - 1.
    const auto& z = trace.pre_activations[l - 1];
    for (std::size_t idx = 0; idx < din.size(); ++idx) {
      double g = z.values()[idx] > T{0} ? din.values()[idx] : 0.0;
      if (dropped) g *= static_cast<double>(trace.masks[l - 1].values()[idx]);
      din.values()[idx] = g;
    }
    delta = std::move(din);
  }
  return grads;
}

template <typename T>
template <typename U>
Mlp<U> Mlp<T>::cast() const {
  std::vector<DenseLayer<U>> layers;
  for (const auto& layer : layers_) {
    layers.push_back({layer.weight.template cast<U>(), std::vector<U>(layer.bias.begin(), layer.bias.end())});
  }
  return Mlp<U>(std::move(layers), dropout_);
}

template <typename T>
bool parameters_bitwise_equal(const Mlp<T>& a, const Mlp<T>& b) {
  if (a.widths() != b.widths()) return false;
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    const auto& la = a.layers()[l];
    const auto& lb = b.layers()[l];
    if (std::memcmp(la.weight.data(), lb.weight.data(), la.weight.size() * sizeof(T)) != 0) return false;
    if (std::memcmp(la.bias.data(), lb.bias.data(), la.bias.size() * sizeof(T)) != 0) return false;
  }
  return true;
}

template <typename T>
Matrix<double> softmax_rows(const Matrix<T>& logits) {
  Matrix<double> p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    double peak = -std::numeric_limits<double>::infinity();
    for (T v : z) peak = std::max(peak, static_cast<double>(v));
    double total = 0.0;
    auto out = p.row(i);
    for (std::size_t k = 0; k < z.size(); ++k) {
      out[k] = std::exp(static_cast<double>(z[k]) - peak);
      total += out[k];
    }
    for (auto& v : out) v /= total;
  }
  return p;
}

template <typename T>
std::vector<double> per_example_cross_entropy(const Matrix<T>& logits, std::span<const int> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  std::vector<double> loss(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    double peak = -std::numeric_limits<double>::infinity();
    for (T v : z) peak = std::max(peak, static_cast<double>(v));
    double total = 0.0;
    for (T v : z) total += std::exp(static_cast<double>(v) - peak);
    loss[i] = peak + std::log(total) - static_cast<double>(z[static_cast<std::size_t>(labels[i])]);
  }
  return loss;
}

template <typename T>
double cross_entropy(const Matrix<T>& logits, std::span<const int> labels) {
  if (logits.rows() == 0) throw Error(Errc::ShapeMismatch, "empty batch");
  const auto loss = per_example_cross_entropy(logits, labels);
  double total = 0.0;
  for (double v : loss) total += v;
  return total / static_cast<double>(loss.size());
}

template <typename T>
std::vector<int> argmax_rows(const Matrix<T>& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k) {
      if (z[k] > z[best]) best = k;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

template <typename T>
AdamState<T>::AdamState(const Mlp<T>& model, AdamConfig config) : config_(config) {
  for (const auto& layer : model.layers()) {
    m_.emplace_back(layer.weight.size(), T{0});
    m_.emplace_back(layer.bias.size(), T{0});
  }
  v_ = m_;
}

template <typename T>
void adam_step(Mlp<T>& model, AdamState<T>& state, const Gradients<T>& grads) {
  const std::size_t n_layers = model.num_layers();
  if (grads.weight.size() != n_layers || grads.bias.size() != n_layers ||
      state.m_.size() != 2 * n_layers) {
    throw Error(Errc::ShapeMismatch, "gradient/optimizer layer count mismatch");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = model.layers()[l];
    if (grads.weight[l].size() != layer.weight.size() || grads.bias[l].size() != layer.bias.size() ||
        state.m_[2 * l].size() != layer.weight.size()) {
      throw Error(Errc::ShapeMismatch, "gradient shape mismatch in layer " + std::to_string(l));
    }
  }

  const auto& c = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](T* param, const T* grad, std::vector<T>& m, std::vector<T>& v) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = grad[i];
      const double mi = c.beta1 * static_cast<double>(m[i]) + (1.0 - c.beta1) * g;
      const double vi = c.beta2 * static_cast<double>(v[i]) + (1.0 - c.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double step = c.lr * (mi / correct1) / (std::sqrt(vi / correct2) + c.eps);
      param[i] = static_cast<T>(static_cast<double>(param[i]) - step);
    }
  };

  auto& layers = model.mutable_layers();
  for (std::size_t l = 0; l < n_layers; ++l) {
    update(layers[l].weight.data(), grads.weight[l].data(), state.m_[2 * l], state.v_[2 * l]);
    update(layers[l].bias.data(), grads.bias[l].data(), state.m_[2 * l + 1], state.v_[2 * l + 1]);
  }
}

#define HOROUF_INSTANTIATE(T)                                                                   \
  template class Mlp<T>;                                                                        \
  template class AdamState<T>;                                                                  \
  template bool parameters_bitwise_equal<T>(const Mlp<T>&, const Mlp<T>&);                      \
  template Matrix<double> softmax_rows<T>(const Matrix<T>&);                                    \
  template std::vector<double> per_example_cross_entropy<T>(const Matrix<T>&, std::span<const int>); \
  template double cross_entropy<T>(const Matrix<T>&, std::span<const int>);                     \
  template std::vector<int> argmax_rows<T>(const Matrix<T>&);                                   \
  template void adam_step<T>(Mlp<T>&, AdamState<T>&, const Gradients<T>&);

HOROUF_INSTANTIATE(float)
HOROUF_INSTANTIATE(double)
#undef HOROUF_INSTANTIATE

template Mlp<float> Mlp<float>::cast<float>() const;
template Mlp<double> Mlp<float>::cast<double>() const;
template Mlp<float> Mlp<double>::cast<float>() const;
template Mlp<double> Mlp<double>::cast<double>() const;

}  // namespace horouf
