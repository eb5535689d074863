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

#include <gtest/gtest.h>

#include <json.hpp>

#include "horouf/error.hpp"
#include "horouf/eval.hpp"
#include "horouf/oracle.hpp"
#include "horouf/training.hpp"
#include "test_support.hpp"

namespace horouf {
namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no horouf::Error thrown";
  return Errc::IoError;
}

TEST(Report, AllCorrect) {
  const std::vector<int> y{0, 1, 2, 2, 1};
  const auto r = report_from_predictions(y, y, 3);
  EXPECT_EQ(r.clean_accuracy, 1.0);
  EXPECT_EQ(r.macro_average, 1.0);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) {
      if (t != p) {
        EXPECT_EQ(r.confusion(t, p), 0u);
      }
    }
  }
  EXPECT_EQ(r.confusion(2, 2), 2u);
  EXPECT_TRUE(top_confusions(r, 5).empty());
}

TEST(Report, ConstantPredictorOnBalancedBinarySet) {
  const std::vector<int> y{0, 1, 0, 1, 0, 1};
  const std::vector<int> pred(6, 0);
  const auto r = report_from_predictions(y, pred, 2);
  EXPECT_EQ(r.clean_accuracy, 0.5);
  EXPECT_EQ(r.per_class_accuracy, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(r.macro_average, 0.5);
}

TEST(Report, MacroSkipsEmptyClassesAndConfusionIsConsistent) {
  Rng rng(3);
  const std::size_t k = 9;
  std::vector<int> y, pred;
  for (int i = 0; i < 500; ++i) {
    const int t = static_cast<int>(rng.below(k - 2));  // classes 7 and 8 never appear
    y.push_back(t);
    pred.push_back(rng.bernoulli(0.6) ? t : static_cast<int>(rng.below(k)));
  }
  const auto r = report_from_predictions(y, pred, k);
  std::uint64_t total = 0;
  double macro = 0;
  std::size_t present = 0;
  for (std::size_t t = 0; t < k; ++t) {
    std::uint64_t row = 0;
    for (std::size_t p = 0; p < k; ++p) row += r.confusion(t, p);
    EXPECT_EQ(row, r.class_counts[t]);
    total += row;
    if (row) {
      EXPECT_DOUBLE_EQ(r.per_class_accuracy[t], static_cast<double>(r.confusion(t, t)) / static_cast<double>(row));
      macro += r.per_class_accuracy[t];
      ++present;
    } else {
      EXPECT_EQ(r.per_class_accuracy[t], 0.0);
    }
  }
  EXPECT_EQ(total, r.n);
  EXPECT_NEAR(r.macro_average, macro / static_cast<double>(present), 1e-15);
  EXPECT_EQ(code_of([] { report_from_predictions(std::vector<int>{3}, std::vector<int>{0}, 3); }),
            Errc::LabelOutOfRange);
}

TEST(TopConfusions, OrderingAndTies) {
  const std::vector<int> y{0, 1, 2, 2, 2, 1, 0};
  const std::vector<int> p{1, 0, 0, 0, 1, 0, 2};
  const auto r = report_from_predictions(y, p, 3);
  const auto top = top_confusions(r, 10);
  const std::vector<ConfusionPair> expected{{1, 0, 2}, {2, 0, 2}, {0, 1, 1}, {0, 2, 1}, {2, 1, 1}};
  EXPECT_EQ(top, expected);
  EXPECT_EQ(top_confusions(r, 2), (std::vector<ConfusionPair>{{1, 0, 2}, {2, 0, 2}}));

  const auto single = report_from_predictions(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 0}, 2);
  EXPECT_EQ(top_confusions(single, 3), (std::vector<ConfusionPair>{{1, 0, 1}}));
}

TEST(TopConfusions, NearDuplicateClassesDominate) {
  auto data = generate({6, 16, 100, 0.5, 8.0, 4});
  // Pull class 5's samples onto class 4's mean so the two overlap.
  for (std::size_t i = 0; i < data.dataset.size(); ++i) {
    if (data.dataset.labels[i] != 5) continue;
    for (std::size_t j = 0; j < 16; ++j) {
      data.dataset.features[i * 16 + j] +=
          static_cast<float>(data.means[4][j] - data.means[5][j] + 0.05);
    }
  }
  std::vector<int> pred;
  for (std::size_t i = 0; i < data.dataset.size(); ++i) pred.push_back(nearest_mean(data.dataset.row(i), data.means));
  const auto r = report_from_predictions(data.dataset.labels, pred, 6);
  const auto top = top_confusions(r, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_TRUE((top[0].true_class == 5 && top[0].predicted_class == 4) ||
              (top[0].true_class == 4 && top[0].predicted_class == 5));
}

TEST(Evaluate, DeterministicAcrossThreadCounts) {
  const auto data = generate({5, 10, 300, 1.0, 3.0, 8}).dataset;
  const auto model = MlpModel::classifier(10, 5, 2);
  const auto a = evaluate(model, data, 1);
  const auto b = evaluate(model, data, 4);
  EXPECT_EQ(a.confusion, b.confusion);
  EXPECT_EQ(a.clean_accuracy, b.clean_accuracy);
  const auto cfg = AttackConfig::pgd(0.2, 5);
  EXPECT_EQ(evaluate_robust(model, data, cfg, 1), evaluate_robust(model, data, cfg, 3));
}

TEST(Evaluate, RobustNeverExceedsCleanAndEqualsAtZero) {
  Rng rng(10);
  const auto data = generate({4, 8, 80, 1.5, 3.0, 9}).dataset;
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto model = train(MlpModel::classifier(8, 4, 1), data, nullptr, cfg).model;
  const double clean = evaluate(model, data).clean_accuracy;
  EXPECT_EQ(evaluate_robust(model, data, AttackConfig::pgd(0.0, 10)), clean);
  for (int t = 0; t < 30; ++t) {
    AttackConfig a = AttackConfig::pgd(rng.uniform(0.0, 2.0), static_cast<int>(rng.below(10)), rng.uniform(0.1, 5));
    a.init = rng.bernoulli(0.5) ? AttackInit::RandomUniform : AttackInit::Zero;
    a.track_best = rng.bernoulli(0.5);
    a.init_seed = rng.next();
    EXPECT_LE(evaluate_robust(model, data, a), clean);
  }
}

TEST(Evaluate, RandomModelIsNearChance) {
  const std::size_t k = 10;
  Rng rng(11);
  EmbeddingDataset data;
  for (int i = 0; i < 500; ++i) {
    std::vector<float> x(32);
    for (auto& v : x) v = static_cast<float>(rng.normal());
    data.append(x, static_cast<int>(rng.below(k)), "r" + std::to_string(i));
  }
  const auto model = MlpModel::classifier(32, k, 12345);
  EXPECT_LE(evaluate_robust(model, data, AttackConfig::pgd(0.05, 10)), 2.0 / static_cast<double>(k));
}

TEST(Evaluate, LabelBeyondModelClasses) {
  EmbeddingDataset ds;
  ds.append(std::vector<float>(4, 0.0f), 7, "x");
  EXPECT_EQ(code_of([&] { evaluate(MlpModel::classifier(4, 3, 1), ds); }), Errc::LabelOutOfRange);
}

TEST(Sweep, RowsAndContracts) {
  const auto data = generate({3, 6, 40, 1.0, 3.0, 2}).dataset;
  const auto a = MlpModel::classifier(6, 3, 1);
  const auto b = MlpModel::classifier(6, 3, 2);
  const std::vector<double> zero{0.0};
  const auto single = sweep(a, b, data, zero, {});
  ASSERT_EQ(single.rows.size(), 1u);
  EXPECT_EQ(single.rows[0].acc_standard, evaluate(a, data).clean_accuracy);
  EXPECT_EQ(single.rows[0].acc_adversarial, evaluate(b, data).clean_accuracy);

  const auto full = sweep(a, b, data, kDefaultEpsilonGrid, {});
  ASSERT_EQ(full.rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(full.rows[i].epsilon, kDefaultEpsilonGrid[i]);
    EXPECT_LE(full.rows[i].acc_standard, full.rows[0].acc_standard);
    EXPECT_LE(full.rows[i].acc_adversarial, full.rows[0].acc_adversarial);
  }
  const std::vector<double> unsorted{0.0, 0.1, 0.05};
  EXPECT_EQ(code_of([&] { sweep(a, b, data, unsorted, {}); }), Errc::InvalidSpec);
  const std::vector<double> repeated{0.1, 0.1};
  EXPECT_EQ(code_of([&] { sweep(a, b, data, repeated, {}); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { sweep(a, MlpModel::classifier(6, 4, 1), data, zero, {}); }), Errc::ShapeMismatch);
}

TEST(Sweep, CsvRoundTripIsBitExact) {
  Rng rng(1);
  SweepResult r;
  double eps = 0.0;
  for (int i = 0; i < 20; ++i) {
    r.rows.push_back({eps, rng.uniform(), rng.uniform()});
    eps += rng.uniform(1e-9, 0.3);
  }
  r.rows.push_back({eps, 1.0 / 3.0, 0.1});
  const auto text = sweep_csv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')), "epsilon,acc_standard,acc_adversarial");
  EXPECT_EQ(parse_sweep_csv(text), r);
  EXPECT_EQ(code_of([] { parse_sweep_csv("nope\n"); }), Errc::ParseError);
  EXPECT_EQ(code_of([] { parse_sweep_csv("epsilon,acc_standard,acc_adversarial\n0.1,x,0.2\n"); }), Errc::ParseError);
}

TEST(Sweep, SvgMentionsEveryPoint) {
  SweepResult r{{{0.0, 0.9, 0.85}, {0.05, 0.4, 0.8}, {0.1, 0.1, 0.7}}};
  const auto svg = sweep_svg(r);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 3, true);
}

TEST(ReportJson, SchemaAndLetterNames) {
  std::vector<int> y(112), p(112);
  for (int c = 0; c < 112; ++c) {
    y[c] = c;
    p[c] = c == 5 ? 4 : c;
  }
  const auto r = report_from_predictions(y, p, 112);
  const auto j = nlohmann::json::parse(report_json(r, true));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["n"], 112);
  EXPECT_EQ(j["class_names"].size(), 112u);
  EXPECT_EQ(j["top_confusions"].size(), 1u);
  EXPECT_EQ(j["top_confusions"][0]["true"], 5);
  EXPECT_FALSE(nlohmann::json::parse(report_json(report_from_predictions(y, y, 112), false)).contains("class_names"));
}

}  // namespace
}  // namespace horouf
