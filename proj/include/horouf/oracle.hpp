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
#include <functional>
#include <span>
#include <vector>

#include "horouf/embedding.hpp"
#include "horouf/mlp.hpp"

namespace horouf {

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t dim = 64;
  std::size_t per_class = 200;
  double sigma = 0.8;   // within-class standard deviation per coordinate
  double margin = 6.0;  // minimum L2 distance between class means
  std::uint64_t seed = 0;
};

struct SyntheticData {
  EmbeddingDataset dataset;  // class-major order, ids "syn-cXXX-YYYYY"
  std::vector<std::vector<double>> means;
};

// Class means are Gaussian with per-coordinate scale 1.2 * margin / sqrt(2 D)
// (typical pairwise distance 1.2 * margin), redrawn until every pair is at
// least `margin` apart. Samples are mean + N(0, sigma^2 I).
// Throws MeanPlacementFailure after 10000 rejected draws for one mean.
SyntheticData generate(const SyntheticSpec& spec);

// Index of the closest mean in L2; ties to the lowest index.
int nearest_mean(std::span<const float> x, const std::vector<std::vector<double>>& means);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> point, double h);

inline constexpr std::size_t kVertexAttackMaxDim = 20;

// Maximum cross-entropy over the 2^D vertices x + epsilon * s, s in {-1, +1}^D,
// of a single-layer (linear) classifier. For a loss convex in x this is the
// exact maximum over the L-infinity ball. Evaluated in double independently
// of Mlp::forward. Throws DimensionTooLarge for D > 20, InvalidSpec for
// models with hidden layers.
template <typename T>
double vertex_attack(const Mlp<T>& convex_model, std::span<const T> x, int label, double epsilon);

}  // namespace horouf
