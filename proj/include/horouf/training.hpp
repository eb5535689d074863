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
#include <optional>
#include <vector>

#include "horouf/adversarial.hpp"
#include "horouf/embedding.hpp"
#include "horouf/mlp.hpp"

namespace horouf {

struct TrainConfig {
  int epochs = 9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  AdamConfig adam;
  // When set, every batch is replaced by its PGD perturbation before the
  // update (adversarial training).
  std::optional<AttackConfig> attack;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Mini-batch Adam on cross-entropy with a seeded shuffle per epoch and
// seeded dropout masks per batch. Throws NumericFailure on a non-finite loss.
TrainResult train(MlpModel model, const EmbeddingDataset& train_set, const EmbeddingDataset* val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Inner max by PGD in Eval mode, outer min by one Adam step in Train mode.
TrainResult adversarial_train(MlpModel model, const EmbeddingDataset& train_set,
                              const EmbeddingDataset* val_set, const AttackConfig& attack,
                              int epochs, std::size_t batch_size, std::uint64_t seed,
                              const EpochCallback& on_epoch = {});

// Gathers rows `idx` of the dataset into a batch.
Matrix<float> gather_rows(const EmbeddingDataset& ds, std::span<const std::size_t> idx,
                          std::vector<int>* labels = nullptr);

}  // namespace horouf
