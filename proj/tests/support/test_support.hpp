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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "horouf/matrix.hpp"
#include "horouf/mlp.hpp"
#include "horouf/rng.hpp"

namespace horouf::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("horouf-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix<T> m(rows, cols);
  for (auto& v : m.values()) v = static_cast<T>(scale * rng.normal());
  return m;
}

inline std::vector<int> random_labels(std::size_t n, int classes, Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return y;
}

// Relative error with an absolute floor on the denominator, so that
// gradient entries near zero are compared on an absolute scale.
inline constexpr double kGradRelFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradRelFloor});
  return std::abs(analytic - numeric) / denom;
}

// Smallest |pre-activation| over all hidden units of a batch; a central
// difference straddling a ReLU kink is not a valid reference.
inline double min_abs_preactivation(const ForwardTrace<double>& trace) {
  double m = INFINITY;
  for (const auto& z : trace.pre_activations) {
    for (double v : z.values()) m = std::min(m, std::abs(v));
  }
  return m;
}

// Independent extended-precision forward pass and mean cross-entropy. Layer
// parameters come flattened (weights row-major, then bias, per layer);
// dropout masks are taken as given.
inline long double reference_loss(const std::vector<std::size_t>& widths, std::span<const double> params,
                                  const Matrix<double>& x, const std::vector<int>& labels,
                                  const std::vector<Matrix<double>>& masks) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<long double> a(x.row(i).begin(), x.row(i).end());
    std::size_t k = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const std::size_t n_in = widths[l], n_out = widths[l + 1];
      const double* w = params.data() + k;
      const double* b = w + n_in * n_out;
      k += n_in * n_out + n_out;
      std::vector<long double> z(n_out);
      for (std::size_t o = 0; o < n_out; ++o) {
        long double acc = b[o];
        for (std::size_t j = 0; j < n_in; ++j) acc += a[j] * static_cast<long double>(w[j * n_out + o]);
        z[o] = acc;
      }
      if (l + 2 < widths.size()) {
        for (std::size_t o = 0; o < n_out; ++o) {
          z[o] = z[o] > 0.0L ? z[o] : 0.0L;
          if (!masks.empty()) z[o] *= masks[l](i, o);
        }
      }
      a = std::move(z);
    }
    const long double top = *std::max_element(a.begin(), a.end());
    long double sum = 0.0L;
    for (long double v : a) sum += std::exp(v - top);
    total += top + std::log(sum) - a[static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<long double>(x.rows());
}

// Central difference of `f` at `point`, step h, with the function values
// subtracted in extended precision and the step measured after rounding.
template <typename F>
std::vector<double> central_difference(F&& f, std::vector<double> point, double h) {
  std::vector<double> grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const long double up = f(point);
    const double step_up = point[i] - saved;
    point[i] = saved - h;
    const long double down = f(point);
    const double step_down = saved - point[i];
    point[i] = saved;
    grad[i] = static_cast<double>((up - down) / (static_cast<long double>(step_up) + step_down));
  }
  return grad;
}

struct GradCheckResult {
  double max_param_error = 0.0;
  double max_input_error = 0.0;
  std::size_t checked = 0;
};

// Compares backward() against central differences of the batch mean loss for
// every parameter and input coordinate. The reference loss is evaluated in
// long double so its rounding stays well below the tolerance. Train mode
// reuses the dropout masks of the analytic pass.
inline GradCheckResult gradient_check(const Mlp<double>& model, const Matrix<double>& x,
                                      const std::vector<int>& labels, Mode mode, std::uint64_t seed,
                                      double h = 1e-5) {
  const auto trace = model.forward(x, mode, seed);
  const auto grads = model.backward(trace, labels);
  GradCheckResult out;

  std::vector<std::size_t> widths{model.input_dim()};
  std::vector<double> params;
  std::vector<double> analytic;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& layer = model.layers()[l];
    widths.push_back(layer.fan_out());
    params.insert(params.end(), layer.weight.values().begin(), layer.weight.values().end());
    params.insert(params.end(), layer.bias.begin(), layer.bias.end());
    analytic.insert(analytic.end(), grads.weight[l].values().begin(), grads.weight[l].values().end());
    analytic.insert(analytic.end(), grads.bias[l].begin(), grads.bias[l].end());
  }

  const auto numeric_params = central_difference(
      [&](const std::vector<double>& p) { return reference_loss(widths, p, x, labels, trace.masks); }, params, h);
  for (std::size_t k = 0; k < params.size(); ++k) {
    out.max_param_error = std::max(out.max_param_error, relative_error(analytic[k], numeric_params[k]));
  }

  const auto numeric_input = central_difference(
      [&](const std::vector<double>& v) {
        const Matrix<double> xi(x.rows(), x.cols(), v);
        return reference_loss(widths, params, xi, labels, trace.masks);
      },
      x.values(), h);
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.max_input_error = std::max(out.max_input_error, relative_error(grads.input.values()[k], numeric_input[k]));
  }
  out.checked = params.size() + x.size();
  return out;
}

struct GradCheckCase {
  Mlp<double> model;
  Matrix<double> x;
  std::vector<int> labels;
  Mode mode = Mode::Eval;
  std::uint64_t dropout_seed = 0;
};

// Random small architecture (input <= 32, classes <= 8, batch <= 8, one or
// two hidden layers). Inputs are redrawn until every hidden pre-activation
// sits at least `kink_margin` away from the ReLU kink.
inline GradCheckCase random_gradcheck_case(std::uint64_t seed, double kink_margin = 1e-3) {
  Rng rng(seed);
  std::vector<std::size_t> widths{2 + rng.below(31)};
  const std::size_t hidden = 1 + rng.below(2);
  for (std::size_t h = 0; h < hidden; ++h) widths.push_back(2 + rng.below(15));
  widths.push_back(2 + rng.below(7));
  const double dropout = rng.bernoulli(0.5) ? 0.3 : 0.0;
  GradCheckCase c{Mlp<double>(widths, dropout, rng.next()), {}, {}, Mode::Eval, rng.next()};
  c.mode = dropout > 0.0 ? Mode::Train : Mode::Eval;
  const std::size_t batch = 1 + rng.below(8);
  c.labels = random_labels(batch, static_cast<int>(widths.back()), rng);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    c.x = random_matrix<double>(batch, widths.front(), rng);
    if (min_abs_preactivation(c.model.forward(c.x, c.mode, c.dropout_seed)) >= kink_margin) break;
  }
  return c;
}

}  // namespace horouf::testing
