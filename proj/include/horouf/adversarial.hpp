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

#include <cstdint>
#include <span>
#include <vector>

#include "horouf/matrix.hpp"
#include "horouf/mlp.hpp"

namespace horouf {

enum class AttackInit { Zero, RandomUniform };

// L-infinity PGD settings. Attacks always run the model in Eval mode.
struct AttackConfig {
  double epsilon = 0.0;
  double alpha = 0.0;
  int steps = 0;
  AttackInit init = AttackInit::Zero;
  std::uint64_t init_seed = 0;
  bool track_best = true;

  // alpha = alpha_ratio * epsilon / steps
  static AttackConfig pgd(double epsilon, int steps, double alpha_ratio = 2.5);

  // Throws InvalidSpec: epsilon >= 0, steps >= 0, alpha > 0 whenever a
  // non-degenerate step is taken (steps > 0 and epsilon > 0).
  void validate() const;
};

template <typename T>
struct Perturbation {
  Matrix<T> delta;
  double achieved_loss = 0.0;        // mean of example_loss
  std::vector<double> example_loss;  // loss at the returned delta, per row
  // Row was misclassified at the clean input or at any visited iterate.
  std::vector<std::uint8_t> fooled;
};

// Largest value of T not exceeding epsilon, so |delta| <= epsilon holds
// exactly even after rounding epsilon to T.
template <typename T>
T ball_radius(double epsilon);

// Coordinate-wise clamp to [-epsilon, epsilon].
template <typename T>
Matrix<T> project(Matrix<T> delta, double epsilon);

template <typename T>
Matrix<T> add(const Matrix<T>& x, const Matrix<T>& delta);

// delta = epsilon * sign(grad_x loss), with sign(0) = 0.
template <typename T>
Perturbation<T> fgsm(const Mlp<T>& model, const Matrix<T>& x, std::span<const int> labels,
                     double epsilon);

// delta_{t+1} = clamp(delta_t + alpha * sign(grad_x loss(x + delta_t)), -eps, eps).
// With track_best the per-row iterate of highest loss is returned; a Zero
// start counts as an iterate. Gradients are taken on the summed loss, so
// each row's attack does not depend on the rest of the batch. `row_offset`
// keys the per-row random start, keeping results independent of batching.
template <typename T>
Perturbation<T> pgd(const Mlp<T>& model, const Matrix<T>& x, std::span<const int> labels,
                    const AttackConfig& cfg, std::uint64_t row_offset = 0);

}  // namespace horouf
