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

#include "horouf/adversarial.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "horouf/error.hpp"
#include "horouf/rng.hpp"

namespace horouf {

namespace {

template <typename T>
T sign_of(T g) {
  if (g > T{0}) return T{1};
  if (g < T{0}) return T{-1};
  return T{0};
}

template <typename T>
void check_batch(const Mlp<T>& model, const Matrix<T>& x, std::span<const int> labels) {
  if (x.cols() != model.input_dim()) throw Error(Errc::ShapeMismatch, "batch width does not match model");
  if (labels.size() != x.rows()) throw Error(Errc::ShapeMismatch, "label count does not match batch");
}

}  // namespace

AttackConfig AttackConfig::pgd(double epsilon, int steps, double alpha_ratio) {
  AttackConfig cfg;
  cfg.epsilon = epsilon;
  cfg.steps = steps;
  cfg.alpha = steps > 0 ? alpha_ratio * epsilon / steps : 0.0;
  return cfg;
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error(Errc::InvalidSpec, "epsilon must be finite and >= 0");
  if (steps < 0) throw Error(Errc::InvalidSpec, "steps must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(Errc::InvalidSpec, "alpha must be finite and >= 0");
  if (steps > 0 && epsilon > 0.0 && !(alpha > 0.0)) {
    throw Error(Errc::InvalidSpec, "alpha must be > 0 when steps > 0");
  }
}

template <typename T>
T ball_radius(double epsilon) {
  T r = static_cast<T>(epsilon);
  if (static_cast<double>(r) > epsilon) r = std::nextafter(r, T{0});
  return r;
}

template <typename T>
Matrix<T> project(Matrix<T> delta, double epsilon) {
  const T r = ball_radius<T>(epsilon);
  for (auto& d : delta.values()) d = d > r ? r : (d < -r ? -r : d);
  return delta;
}

template <typename T>
Matrix<T> add(const Matrix<T>& x, const Matrix<T>& delta) {
  Matrix<T> out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += delta.values()[i];
  return out;
}

template <typename T>
Perturbation<T> fgsm(const Mlp<T>& model, const Matrix<T>& x, std::span<const int> labels,
                     double epsilon) {
  check_batch(model, x, labels);
  if (!(epsilon >= 0.0)) throw Error(Errc::InvalidSpec, "epsilon must be >= 0");
  const T r = ball_radius<T>(epsilon);

  const auto clean = model.forward(x, Mode::Eval);
  const auto grad = model.backward(clean, labels, Reduction::Sum).input;
  const auto clean_pred = argmax_rows(clean.logits);

  Perturbation<T> p;
  p.delta = Matrix<T>(x.rows(), x.cols());
  for (std::size_t i = 0; i < grad.size(); ++i) p.delta.values()[i] = r * sign_of(grad.values()[i]);

  const auto logits = model.forward(add(x, p.delta), Mode::Eval).logits;
  const auto pred = argmax_rows(logits);
  p.example_loss = per_example_cross_entropy(logits, labels);
  p.fooled.resize(x.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    p.fooled[i] = clean_pred[i] != labels[i] || pred[i] != labels[i];
    total += p.example_loss[i];
  }
  p.achieved_loss = x.rows() ? total / static_cast<double>(x.rows()) : 0.0;
  return p;
}

template <typename T>
Perturbation<T> pgd(const Mlp<T>& model, const Matrix<T>& x, std::span<const int> labels,
                    const AttackConfig& cfg, std::uint64_t row_offset) {
  check_batch(model, x, labels);
  cfg.validate();
  const std::size_t rows = x.rows(), cols = x.cols();
  const T r = ball_radius<T>(cfg.epsilon);
  const T step = static_cast<T>(cfg.alpha);

  Perturbation<T> p;
  p.fooled.assign(rows, 0);
  Matrix<T> delta(rows, cols);
  if (cfg.init == AttackInit::RandomUniform) {
    for (std::size_t i = 0; i < rows; ++i) {
      Rng rng(mix_seed(cfg.init_seed, row_offset + i));
      for (auto& d : delta.row(i)) d = static_cast<T>(rng.uniform(-cfg.epsilon, cfg.epsilon));
    }
    delta = project(std::move(delta), cfg.epsilon);
    // A random start skips the clean point; check it separately.
    const auto clean_pred = argmax_rows(model.predict_logits(x));
    for (std::size_t i = 0; i < rows; ++i) p.fooled[i] = clean_pred[i] != labels[i];
  }

  Matrix<T> best = delta;
  std::vector<double> best_loss(rows, -std::numeric_limits<double>::infinity());
  std::vector<double> loss;

  for (int t = 0;; ++t) {
    const auto trace = model.forward(add(x, delta), Mode::Eval);
    loss = per_example_cross_entropy(trace.logits, labels);
    const auto pred = argmax_rows(trace.logits);
    for (std::size_t i = 0; i < rows; ++i) {
      if (pred[i] != labels[i]) p.fooled[i] = 1;
      if (cfg.track_best && loss[i] > best_loss[i]) {
        best_loss[i] = loss[i];
        std::copy(delta.row(i).begin(), delta.row(i).end(), best.row(i).begin());
      }
    }
    if (t == cfg.steps) break;

    const auto grad = model.backward(trace, labels, Reduction::Sum).input;
    for (std::size_t k = 0; k < delta.size(); ++k) {
      T d = delta.values()[k] + step * sign_of(grad.values()[k]);
      delta.values()[k] = d > r ? r : (d < -r ? -r : d);
    }
  }

  if (cfg.track_best) {
    p.delta = std::move(best);
    p.example_loss = std::move(best_loss);
  } else {
    p.delta = std::move(delta);
    p.example_loss = std::move(loss);
  }
  double total = 0.0;
  for (double v : p.example_loss) total += v;
  p.achieved_loss = rows ? total / static_cast<double>(rows) : 0.0;
  return p;
}

#define HOROUF_INSTANTIATE(T)                                                                 \
  template T ball_radius<T>(double);                                                          \
  template Matrix<T> project<T>(Matrix<T>, double);                                           \
  template Matrix<T> add<T>(const Matrix<T>&, const Matrix<T>&);                              \
  template Perturbation<T> fgsm<T>(const Mlp<T>&, const Matrix<T>&, std::span<const int>, double); \
  template Perturbation<T> pgd<T>(const Mlp<T>&, const Matrix<T>&, std::span<const int>,      \
                                  const AttackConfig&, std::uint64_t);

HOROUF_INSTANTIATE(float)
HOROUF_INSTANTIATE(double)
#undef HOROUF_INSTANTIATE

}  // namespace horouf
