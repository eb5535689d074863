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

#include "horouf/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "horouf/error.hpp"
#include "horouf/rng.hpp"

namespace horouf {

namespace {

constexpr std::uint64_t kShuffleSalt = 0x73687566;  // "shuf"
constexpr std::uint64_t kDropoutSalt = 0x64726f70;  // "drop"
constexpr std::uint64_t kAttackSalt = 0x61747463;   // "attc"
constexpr std::size_t kEvalChunk = 256;

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

LossAccuracy measure(const MlpModel& model, const EmbeddingDataset& ds) {
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < ds.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(begin + kEvalChunk, ds.size());
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    std::vector<int> labels;
    const auto logits = model.predict_logits(gather_rows(ds, idx, &labels));
    for (double v : per_example_cross_entropy(logits, labels)) loss += v;
    const auto pred = argmax_rows(logits);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
  }
  const auto n = static_cast<double>(ds.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

Matrix<float> gather_rows(const EmbeddingDataset& ds, std::span<const std::size_t> idx,
                          std::vector<int>* labels) {
  Matrix<float> x(idx.size(), ds.dim);
  if (labels) labels->resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = ds.row(idx[r]);
    std::copy(src.begin(), src.end(), x.row(r).begin());
    if (labels) (*labels)[r] = ds.labels[idx[r]];
  }
  return x;
}

TrainResult train(MlpModel model, const EmbeddingDataset& train_set, const EmbeddingDataset* val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw Error(Errc::InvalidSpec, "training set is empty");
  if (cfg.batch_size == 0) throw Error(Errc::InvalidSpec, "batch size must be positive");
  if (cfg.epochs < 0) throw Error(Errc::InvalidSpec, "epochs must be >= 0");
  if (train_set.dim != model.input_dim()) {
    throw Error(Errc::ShapeMismatch, "dataset width " + std::to_string(train_set.dim) +
                                         " does not match model input " + std::to_string(model.input_dim()));
  }
  train_set.validate(static_cast<int>(model.num_classes()));
  if (val_set && !val_set->empty()) val_set->validate(static_cast<int>(model.num_classes()));
  if (cfg.attack) cfg.attack->validate();

  AdamState<float> adam(model, cfg.adam);
  TrainResult result{std::move(model), {}};
  MlpModel& net = result.model;

  std::vector<std::size_t> order(train_set.size());
  std::uint64_t global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(mix_seed(mix_seed(cfg.seed, kShuffleSalt), static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++global_step) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      std::vector<int> labels;
      Matrix<float> x = gather_rows(train_set, std::span(order).subspan(begin, end - begin), &labels);

      if (cfg.attack) {
        AttackConfig attack = *cfg.attack;
        attack.init_seed = mix_seed(mix_seed(cfg.attack->init_seed, kAttackSalt), global_step);
        x = add(x, pgd(net, x, labels, attack).delta);
      }

      const auto trace = net.forward(x, Mode::Train, mix_seed(mix_seed(cfg.seed, kDropoutSalt), global_step));
      const double loss = cross_entropy(trace.logits, labels);
      if (!std::isfinite(loss)) {
        throw Error(Errc::NumericFailure, "non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      loss_sum += loss * static_cast<double>(end - begin);
      const auto pred = argmax_rows(trace.logits);
      for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];

      adam_step(net, adam, net.backward(trace, labels));
    }

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(train_set.size());
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (val_set && !val_set->empty()) {
      const auto v = measure(net, *val_set);
      m.val_loss = v.loss;
      m.val_accuracy = v.accuracy;
    }
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

TrainResult adversarial_train(MlpModel model, const EmbeddingDataset& train_set,
                              const EmbeddingDataset* val_set, const AttackConfig& attack,
                              int epochs, std::size_t batch_size, std::uint64_t seed,
                              const EpochCallback& on_epoch) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.seed = seed;
  cfg.attack = attack;
  return train(std::move(model), train_set, val_set, cfg, on_epoch);
}

}  // namespace horouf
