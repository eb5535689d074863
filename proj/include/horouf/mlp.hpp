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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "horouf/matrix.hpp"

namespace horouf {

enum class Mode { Train, Eval };
enum class Reduction { Mean, Sum };

// Fully connected layer computing y = x W + b, with W stored fan_in x fan_out.
template <typename T>
struct DenseLayer {
  Matrix<T> weight;
  std::vector<T> bias;

  std::size_t fan_in() const { return weight.rows(); }
  std::size_t fan_out() const { return weight.cols(); }
};

template <typename T>
struct ForwardTrace {
  Mode mode = Mode::Eval;
  std::uint64_t stamp = 0;
  std::vector<Matrix<T>> inputs;           // input of each layer; inputs[0] is the batch
  std::vector<Matrix<T>> pre_activations;  // hidden layers only
  std::vector<Matrix<T>> masks;            // hidden layers, Train mode only
  Matrix<T> logits;
};

template <typename T>
struct Gradients {
  std::vector<Matrix<T>> weight;
  std::vector<std::vector<T>> bias;
  Matrix<T> input;
};

// Stack of dense layers with ReLU and inverted dropout after every hidden
// layer and a linear output. A model with no hidden layers is a plain linear
// classifier (the convex surrogate used by the attack oracle).
template <typename T>
class Mlp {
 public:
  // widths = {input, hidden..., classes}
  Mlp(std::vector<std::size_t> widths, double dropout, std::uint64_t init_seed);
  Mlp(std::vector<DenseLayer<T>> layers, double dropout);

  // input -> 256 -> 128 -> classes, dropout 0.3
  static Mlp classifier(std::size_t input_dim, std::size_t num_classes, std::uint64_t init_seed);

  std::size_t input_dim() const { return layers_.front().fan_in(); }
  std::size_t num_classes() const { return layers_.back().fan_out(); }
  std::size_t num_layers() const { return layers_.size(); }
  std::vector<std::size_t> widths() const;
  double dropout() const { return dropout_; }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer<T>>& layers() const { return layers_; }
  // Any access through here invalidates outstanding traces.
  std::vector<DenseLayer<T>>& mutable_layers();
  std::uint64_t stamp() const { return stamp_; }

  // Train mode draws dropout masks from `seed`; Eval mode ignores it.
  ForwardTrace<T> forward(const Matrix<T>& x, Mode mode, std::uint64_t seed = 0) const;
  Matrix<T> predict_logits(const Matrix<T>& x) const;

  // Exact gradients of the batch cross-entropy (mean or sum over rows) with
  // respect to every parameter and to the input batch. Reuses the dropout
  // masks recorded in the trace. Throws StaleTrace if the model changed.
  Gradients<T> backward(const ForwardTrace<T>& trace, std::span<const int> labels,
                        Reduction reduction = Reduction::Mean) const;

  template <typename U>
  Mlp<U> cast() const;

 private:
  void check_shapes() const;

  std::vector<DenseLayer<T>> layers_;
  double dropout_ = 0.0;
  std::uint64_t stamp_ = 0;
};

template <typename T>
bool parameters_bitwise_equal(const Mlp<T>& a, const Mlp<T>& b);

// Row-wise softmax, computed in double with max subtraction.
template <typename T>
Matrix<double> softmax_rows(const Matrix<T>& logits);

template <typename T>
std::vector<double> per_example_cross_entropy(const Matrix<T>& logits, std::span<const int> labels);

// Mean over the batch. Throws LabelOutOfRange.
template <typename T>
double cross_entropy(const Matrix<T>& logits, std::span<const int> labels);

// Lowest index wins ties.
template <typename T>
std::vector<int> argmax_rows(const Matrix<T>& logits);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class AdamState {
 public:
  explicit AdamState(const Mlp<T>& model, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  const std::vector<std::vector<T>>& first_moment() const { return m_; }
  const std::vector<std::vector<T>>& second_moment() const { return v_; }

 private:
  template <typename U>
  friend void adam_step(Mlp<U>& model, AdamState<U>& state, const Gradients<U>& grads);

  AdamConfig config_;
  std::uint64_t step_ = 0;
  // One flat buffer per tensor: weight of layer l at 2l, bias at 2l + 1.
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

// Bias-corrected Adam update. Throws ShapeMismatch on misaligned gradients.
template <typename T>
void adam_step(Mlp<T>& model, AdamState<T>& state, const Gradients<T>& grads);

using MlpModel = Mlp<float>;

}  // namespace horouf
