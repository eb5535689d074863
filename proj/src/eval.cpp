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

#include "horouf/eval.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "horouf/corpus.hpp"
#include "horouf/error.hpp"
#include "horouf/parallel.hpp"
#include "horouf/training.hpp"

namespace horouf {

namespace {

constexpr std::size_t kEvalChunk = 256;
constexpr std::size_t kAttackChunk = 64;

std::vector<std::size_t> chunk_rows(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::ParseError, "bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

EvalReport report_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                   std::size_t num_classes) {
  if (truth.size() != predicted.size()) throw Error(Errc::ShapeMismatch, "prediction count mismatch");
  EvalReport r;
  r.num_classes = num_classes;
  r.n = truth.size();
  r.confusion = Matrix<std::uint64_t>(num_classes, num_classes, 0);
  r.class_counts.assign(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int y = truth[i], p = predicted[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes || p < 0 ||
        static_cast<std::size_t>(p) >= num_classes) {
      throw Error(Errc::LabelOutOfRange, "class outside [0, " + std::to_string(num_classes) + ")");
    }
    ++r.confusion(y, p);
    ++r.class_counts[y];
    correct += y == p;
  }
  r.clean_accuracy = r.n ? static_cast<double>(correct) / static_cast<double>(r.n) : 0.0;
  r.per_class_accuracy.assign(num_classes, 0.0);
  double macro = 0.0;
  std::size_t populated = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (r.class_counts[c] == 0) continue;
    r.per_class_accuracy[c] =
        static_cast<double>(r.confusion(c, c)) / static_cast<double>(r.class_counts[c]);
    macro += r.per_class_accuracy[c];
    ++populated;
  }
  r.macro_average = populated ? macro / static_cast<double>(populated) : 0.0;
  return r;
}

EvalReport evaluate(const MlpModel& model, const EmbeddingDataset& ds, unsigned threads) {
  if (!ds.empty() && ds.dim != model.input_dim()) throw Error(Errc::ShapeMismatch, "dataset width mismatch");
  ds.validate(static_cast<int>(model.num_classes()));
  std::vector<int> predicted(ds.size());
  const std::size_t chunks = (ds.size() + kEvalChunk - 1) / kEvalChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kEvalChunk, end = std::min(begin + kEvalChunk, ds.size());
    const auto idx = chunk_rows(begin, end);
    const auto pred = argmax_rows(model.predict_logits(gather_rows(ds, idx)));
    std::copy(pred.begin(), pred.end(), predicted.begin() + static_cast<std::ptrdiff_t>(begin));
  });
  return report_from_predictions(ds.labels, predicted, model.num_classes());
}

double evaluate_robust(const MlpModel& model, const EmbeddingDataset& ds, const AttackConfig& cfg,
                       unsigned threads) {
  if (!ds.empty() && ds.dim != model.input_dim()) throw Error(Errc::ShapeMismatch, "dataset width mismatch");
  ds.validate(static_cast<int>(model.num_classes()));
  cfg.validate();
  if (ds.empty()) return 0.0;
  std::vector<std::uint8_t> fooled(ds.size());
  const std::size_t chunks = (ds.size() + kAttackChunk - 1) / kAttackChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kAttackChunk, end = std::min(begin + kAttackChunk, ds.size());
    const auto idx = chunk_rows(begin, end);
    std::vector<int> labels;
    const auto x = gather_rows(ds, idx, &labels);
    const auto p = pgd(model, x, labels, cfg, begin);
    std::copy(p.fooled.begin(), p.fooled.end(), fooled.begin() + static_cast<std::ptrdiff_t>(begin));
  });
  const auto survived = std::count(fooled.begin(), fooled.end(), std::uint8_t{0});
  return static_cast<double>(survived) / static_cast<double>(ds.size());
}

SweepResult sweep(const MlpModel& standard, const MlpModel& adversarial, const EmbeddingDataset& ds,
                  std::span<const double> epsilons, const SweepSettings& settings, unsigned threads) {
  if (standard.input_dim() != adversarial.input_dim() ||
      standard.num_classes() != adversarial.num_classes()) {
    throw Error(Errc::ShapeMismatch, "sweep models disagree on input width or class count");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0.0) || (i > 0 && !(epsilons[i] > epsilons[i - 1]))) {
      throw Error(Errc::InvalidSpec, "epsilons must be non-negative and strictly increasing");
    }
  }
  SweepResult result;
  for (double eps : epsilons) {
    AttackConfig cfg = AttackConfig::pgd(eps, settings.steps, settings.alpha_ratio);
    cfg.init = settings.init;
    cfg.init_seed = settings.init_seed;
    result.rows.push_back({eps, evaluate_robust(standard, ds, cfg, threads),
                           evaluate_robust(adversarial, ds, cfg, threads)});
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "epsilon,acc_standard,acc_adversarial\n";
  for (const auto& r : result.rows) {
    out += format_double(r.epsilon) + "," + format_double(r.acc_standard) + "," +
           format_double(r.acc_adversarial) + "\n";
  }
  return out;
}

SweepResult parse_sweep_csv(std::string_view text) {
  SweepResult result;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "epsilon,acc_standard,acc_adversarial") {
    throw Error(Errc::ParseError, "sweep CSV header missing");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos || line.find(',', b + 1) != std::string::npos) {
      throw Error(Errc::ParseError, "sweep CSV row needs 3 columns: " + line);
    }
    std::string_view v(line);
    result.rows.push_back({parse_double(v.substr(0, a)), parse_double(v.substr(a + 1, b - a - 1)),
                           parse_double(v.substr(b + 1))});
  }
  return result;
}

std::string sweep_svg(const SweepResult& result) {
  constexpr double kW = 480, kH = 320, kPad = 48;
  double max_eps = 0.0;
  for (const auto& r : result.rows) max_eps = std::max(max_eps, r.epsilon);
  if (max_eps <= 0.0) max_eps = 1.0;
  auto px = [&](double eps) { return kPad + (kW - 2 * kPad) * eps / max_eps; };
  auto py = [&](double acc) { return kH - kPad - (kH - 2 * kPad) * acc; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kPad << "\" y1=\"" << py(0) << "\" x2=\"" << kW - kPad << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kPad << "\" y1=\"" << py(0) << "\" x2=\"" << kPad << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    svg << "<text x=\"" << kPad - 6 << "\" y=\"" << py(tick) + 4
        << "\" font-size=\"10\" text-anchor=\"end\">" << tick << "</text>\n";
  }
  for (const auto& r : result.rows) {
    svg << "<text x=\"" << px(r.epsilon) << "\" y=\"" << py(0) + 14
        << "\" font-size=\"10\" text-anchor=\"middle\">" << r.epsilon << "</text>\n";
  }
  auto polyline = [&](auto pick, const char* color, const char* name, double legend_y) {
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : result.rows) svg << px(r.epsilon) << "," << py(pick(r)) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << kW - kPad << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << color
        << "\" text-anchor=\"end\">" << name << "</text>\n";
  };
  polyline([](const SweepRow& r) { return r.acc_standard; }, "#d62728", "standard", 20);
  polyline([](const SweepRow& r) { return r.acc_adversarial; }, "#1f77b4", "adversarial", 34);
  svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << "PGD epsilon (L-inf)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::vector<ConfusionPair> top_confusions(const EvalReport& report, std::size_t k) {
  std::vector<ConfusionPair> cells;
  for (std::size_t t = 0; t < report.confusion.rows(); ++t) {
    for (std::size_t p = 0; p < report.confusion.cols(); ++p) {
      if (t != p && report.confusion(t, p) > 0) {
        cells.push_back({static_cast<int>(t), static_cast<int>(p), report.confusion(t, p)});
      }
    }
  }
  // cells are already in (true, predicted) order, so a stable sort keeps ties ordered
  std::stable_sort(cells.begin(), cells.end(),
                   [](const ConfusionPair& a, const ConfusionPair& b) { return a.count > b.count; });
  if (cells.size() > k) cells.resize(k);
  return cells;
}

std::string report_json(const EvalReport& report, bool letter_labels) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["n"] = report.n;
  j["num_classes"] = report.num_classes;
  j["clean_accuracy"] = report.clean_accuracy;
  j["macro_average"] = report.macro_average;
  j["per_class_accuracy"] = report.per_class_accuracy;
  j["class_counts"] = report.class_counts;
  auto& conf = j["confusion"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < report.confusion.rows(); ++t) {
    conf.push_back(std::vector<std::uint64_t>(report.confusion.row(t).begin(), report.confusion.row(t).end()));
  }
  if (letter_labels && report.num_classes == static_cast<std::size_t>(kNumClasses)) {
    auto& names = j["class_names"] = nlohmann::ordered_json::array();
    for (int c = 0; c < kNumClasses; ++c) names.push_back(label_string(decode_label(c)));
  }
  auto& top = j["top_confusions"] = nlohmann::ordered_json::array();
  for (const auto& c : top_confusions(report, 10)) {
    top.push_back({{"true", c.true_class}, {"predicted", c.predicted_class}, {"count", c.count}});
  }
  return j.dump(2);
}

}  // namespace horouf
