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
#include <string>
#include <string_view>
#include <vector>

#include "horouf/adversarial.hpp"
#include "horouf/embedding.hpp"
#include "horouf/matrix.hpp"
#include "horouf/mlp.hpp"

namespace horouf {

struct EvalReport {
  std::size_t num_classes = 0;
  std::size_t n = 0;
  double clean_accuracy = 0.0;
  // Mean of per_class_accuracy over classes with at least one sample.
  double macro_average = 0.0;
  std::vector<double> per_class_accuracy;  // 0 for classes without samples
  std::vector<std::size_t> class_counts;
  Matrix<std::uint64_t> confusion;  // rows: true class, cols: predicted
};

EvalReport report_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                   std::size_t num_classes);

// Argmax of Eval-mode logits, ties to the lowest class index.
EvalReport evaluate(const MlpModel& model, const EmbeddingDataset& ds, unsigned threads = 1);

// Fraction of rows the attack failed to misclassify at the clean input and at
// every visited iterate. Never exceeds the clean accuracy.
double evaluate_robust(const MlpModel& model, const EmbeddingDataset& ds, const AttackConfig& cfg,
                       unsigned threads = 1);

struct SweepRow {
  double epsilon = 0.0;
  double acc_standard = 0.0;
  double acc_adversarial = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct SweepSettings {
  int steps = 50;
  double alpha_ratio = 2.5;
  AttackInit init = AttackInit::Zero;
  std::uint64_t init_seed = 0;
};

inline constexpr double kDefaultEpsilonGrid[] = {0.0, 0.01, 0.02, 0.05, 0.1};

// One evaluate_robust per (model, epsilon). Epsilons must be strictly
// increasing and non-negative.
SweepResult sweep(const MlpModel& standard, const MlpModel& adversarial, const EmbeddingDataset& ds,
                  std::span<const double> epsilons, const SweepSettings& settings,
                  unsigned threads = 1);

// CSV with header "epsilon,acc_standard,acc_adversarial"; values printed
// with 17 significant digits so parsing restores them exactly.
std::string sweep_csv(const SweepResult& result);
SweepResult parse_sweep_csv(std::string_view text);
std::string sweep_svg(const SweepResult& result);

struct ConfusionPair {
  int true_class = 0;
  int predicted_class = 0;
  std::uint64_t count = 0;

  friend bool operator==(const ConfusionPair&, const ConfusionPair&) = default;
};

// k largest off-diagonal cells, ties by (true, predicted) index.
std::vector<ConfusionPair> top_confusions(const EvalReport& report, std::size_t k);

// Versioned JSON document for a report.
inline constexpr int kReportSchemaVersion = 1;
std::string report_json(const EvalReport& report, bool letter_labels);

}  // namespace horouf
