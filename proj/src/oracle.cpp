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

#include "horouf/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "horouf/error.hpp"
#include "horouf/rng.hpp"

namespace horouf {

namespace {

constexpr int kMaxMeanAttempts = 10000;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.dim < 1 || !(spec.margin > 0.0) || !(spec.sigma >= 0.0)) {
    throw Error(Errc::InvalidSpec, "synthetic spec needs classes >= 2, dim >= 1, margin > 0, sigma >= 0");
  }
  Rng rng(spec.seed);
  const double scale = 1.2 * spec.margin / std::sqrt(2.0 * static_cast<double>(spec.dim));
  const double min_sq = spec.margin * spec.margin;

  SyntheticData out;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    std::vector<double> mean(spec.dim);
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == kMaxMeanAttempts) {
        throw Error(Errc::MeanPlacementFailure,
                    "could not place mean " + std::to_string(c) + " at margin " + std::to_string(spec.margin));
      }
      for (auto& v : mean) v = scale * rng.normal();
      bool ok = true;
      for (const auto& other : out.means) {
        if (squared_distance(mean, other) < min_sq) {
          ok = false;
          break;
        }
      }
      if (ok) break;
    }
    out.means.push_back(std::move(mean));
  }

  auto& ds = out.dataset;
  ds.dim = spec.dim;
  std::vector<float> row(spec.dim);
  char id[40];
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k) {
      for (std::size_t j = 0; j < spec.dim; ++j) {
        row[j] = static_cast<float>(out.means[c][j] + spec.sigma * rng.normal());
      }
      std::snprintf(id, sizeof id, "syn-c%03zu-%05zu", c, k);
      ds.append(row, static_cast<int>(c), id);
    }
  }
  return out;
}

int nearest_mean(std::span<const float> x, const std::vector<std::vector<double>>& means) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < means.size(); ++c) {
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d += (x[j] - means[c][j]) * (x[j] - means[c][j]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> point, double h) {
  if (!(h > 0.0)) throw Error(Errc::InvalidSpec, "finite-difference step must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

template <typename T>
double vertex_attack(const Mlp<T>& convex_model, std::span<const T> x, int label, double epsilon) {
  if (convex_model.num_layers() != 1) {
    throw Error(Errc::InvalidSpec, "vertex oracle needs a single linear layer");
  }
  const auto& layer = convex_model.layers().front();
  const std::size_t dim = layer.fan_in(), classes = layer.fan_out();
  if (dim > kVertexAttackMaxDim) {
    throw Error(Errc::DimensionTooLarge, "vertex enumeration limited to D <= 20, got " + std::to_string(dim));
  }
  if (x.size() != dim) throw Error(Errc::ShapeMismatch, "example width does not match model");
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw Error(Errc::LabelOutOfRange, "label outside model classes");
  }

  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> z(classes);
  const std::uint64_t vertices = std::uint64_t{1} << dim;
  for (std::uint64_t mask = 0; mask < vertices; ++mask) {
    for (std::size_t o = 0; o < classes; ++o) z[o] = static_cast<double>(layer.bias[o]);
    for (std::size_t k = 0; k < dim; ++k) {
      const double xk = static_cast<double>(x[k]) + ((mask >> k) & 1 ? epsilon : -epsilon);
      for (std::size_t o = 0; o < classes; ++o) z[o] += xk * static_cast<double>(layer.weight(k, o));
    }
    double peak = z[0];
    for (double v : z) peak = std::max(peak, v);
    double total = 0.0;
    for (double v : z) total += std::exp(v - peak);
    best = std::max(best, peak + std::log(total) - z[static_cast<std::size_t>(label)]);
  }
  return best;
}

template double vertex_attack<float>(const Mlp<float>&, std::span<const float>, int, double);
template double vertex_attack<double>(const Mlp<double>&, std::span<const double>, int, double);

}  // namespace horouf
