// Copyright 2026 The incanom Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "incanom/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace incanom {
namespace {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts CheckInputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  Counts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw NumericError("non-finite score");
    (labels[i] == 1 ? c.pos : c.neg) += 1;
  }
  return c;
}

std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Calls fn(threshold, tp, fp) once per distinct score, descending.
template <typename Fn>
void SweepThresholds(std::span<const double> scores, std::span<const int> labels, Fn fn) {
  auto order = DescendingOrder(scores);
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    fn(t, tp, fp);
  }
}

double SafeDiv(double a, double b) { return b > 0.0 ? a / b : 0.0; }

}  // namespace

double RocAuc(std::span<const double> scores, std::span<const int> labels) {
  auto c = CheckInputs(scores, labels);
  if (c.pos == 0 || c.neg == 0) throw SingleClassError("skip thresholded metrics: single class");
  double area = 0.0;
  double prev_x = 0.0, prev_y = 0.0;
  SweepThresholds(scores, labels, [&](double, std::size_t tp, std::size_t fp) {
    double x = static_cast<double>(fp) / static_cast<double>(c.neg);
    double y = static_cast<double>(tp) / static_cast<double>(c.pos);
    area += (x - prev_x) * (y + prev_y) * 0.5;
    prev_x = x;
    prev_y = y;
  });
  return area;
}

double PrAuc(std::span<const double> scores, std::span<const int> labels) {
  auto c = CheckInputs(scores, labels);
  if (c.pos == 0) throw SingleClassError("zero positives");
  double ap = 0.0;
  double prev_r = 0.0;
  SweepThresholds(scores, labels, [&](double, std::size_t tp, std::size_t fp) {
    double r = static_cast<double>(tp) / static_cast<double>(c.pos);
    double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (r - prev_r) * p;
    prev_r = r;
  });
  return ap;
}

ThresholdMetrics MetricsAt(std::span<const double> scores, std::span<const int> labels,
                           double threshold) {
  auto c = CheckInputs(scores, labels);
  ThresholdMetrics m;
  m.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] >= threshold;
    if (labels[i] == 1) (pred ? m.confusion.tp : m.confusion.fn) += 1;
    else (pred ? m.confusion.fp : m.confusion.tn) += 1;
  }
  const double tp = static_cast<double>(m.confusion.tp);
  const double fp = static_cast<double>(m.confusion.fp);
  const double fn = static_cast<double>(m.confusion.fn);
  const double tn = static_cast<double>(m.confusion.tn);
  m.tpr = SafeDiv(tp, static_cast<double>(c.pos));
  m.fpr = SafeDiv(fp, static_cast<double>(c.neg));
  m.youden_j = m.tpr - m.fpr;
  m.acc = SafeDiv(tp + tn, static_cast<double>(scores.size()));
  m.precision = SafeDiv(tp, tp + fp);
  m.recall = SafeDiv(tp, tp + fn);
  m.f1 = SafeDiv(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

ThresholdMetrics YoudenThreshold(std::span<const double> scores, std::span<const int> labels) {
  auto c = CheckInputs(scores, labels);
  if (c.pos == 0 || c.neg == 0) throw SingleClassError("skip thresholded metrics: single class");
  double best_t = std::numeric_limits<double>::infinity();
  double best_j = 0.0;
  SweepThresholds(scores, labels, [&](double t, std::size_t tp, std::size_t fp) {
    double j = static_cast<double>(tp) / static_cast<double>(c.pos) -
               static_cast<double>(fp) / static_cast<double>(c.neg);
    if (j > best_j) {
      best_j = j;
      best_t = t;
    }
  });
  return MetricsAt(scores, labels, best_t);
}

std::vector<CurvePoint> RocCurve(std::span<const double> scores, std::span<const int> labels) {
  auto c = CheckInputs(scores, labels);
  if (c.pos == 0 || c.neg == 0) throw SingleClassError("skip thresholded metrics: single class");
  std::vector<CurvePoint> pts{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  SweepThresholds(scores, labels, [&](double t, std::size_t tp, std::size_t fp) {
    pts.push_back({static_cast<double>(fp) / static_cast<double>(c.neg),
                   static_cast<double>(tp) / static_cast<double>(c.pos), t});
  });
  return pts;
}

std::vector<CurvePoint> PrCurve(std::span<const double> scores, std::span<const int> labels) {
  auto c = CheckInputs(scores, labels);
  if (c.pos == 0) throw SingleClassError("zero positives");
  std::vector<CurvePoint> pts;
  SweepThresholds(scores, labels, [&](double t, std::size_t tp, std::size_t fp) {
    pts.push_back({static_cast<double>(tp) / static_cast<double>(c.pos),
                   static_cast<double>(tp) / static_cast<double>(tp + fp), t});
  });
  return pts;
}

EvalReport Evaluate(std::span<const double> scores, std::span<const int> labels) {
  auto c = CheckInputs(scores, labels);
  EvalReport r;
  r.count = scores.size();
  r.positives = c.pos;
  r.both_classes = c.pos > 0 && c.neg > 0;
  if (c.pos > 0) {
    r.pr_auc = PrAuc(scores, labels);
    r.pr_points = PrCurve(scores, labels);
  }
  if (r.both_classes) {
    r.roc_auc = RocAuc(scores, labels);
    r.at_youden = YoudenThreshold(scores, labels);
    r.roc_points = RocCurve(scores, labels);
  }
  return r;
}

nlohmann::json ReportToJson(const EvalReport& report) {
  using nlohmann::json;
  json j;
  j["count"] = report.count;
  j["positives"] = report.positives;
  j["both_classes"] = report.both_classes;
  j["roc_auc"] = report.roc_auc ? json(*report.roc_auc) : json(nullptr);
  j["pr_auc"] = report.pr_auc ? json(*report.pr_auc) : json(nullptr);
  if (report.at_youden) {
    const auto& m = *report.at_youden;
    j["threshold"] = std::isfinite(m.threshold) ? json(m.threshold) : json(nullptr);
    j["threshold_is_infinite"] = !std::isfinite(m.threshold);
    j["youden_j"] = m.youden_j;
    j["acc"] = m.acc;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["tn"] = m.confusion.tn;
    j["fp"] = m.confusion.fp;
    j["fn"] = m.confusion.fn;
    j["tp"] = m.confusion.tp;
  } else {
    j["thresholded_metrics"] = "skipped: labels contain a single class";
  }
  return j;
}

std::string CurveCsv(const std::vector<CurvePoint>& points, const char* x_name, const char* y_name) {
  std::ostringstream os;
  os.precision(17);
  os << x_name << ',' << y_name << ",threshold\n";
  for (const auto& p : points) {
    os << p.x << ',' << p.y << ',';
    if (std::isfinite(p.threshold)) os << p.threshold;
    else os << "inf";
    os << '\n';
  }
  return os.str();
}

std::map<std::string, AggregateStat> AggregateReports(const std::vector<nlohmann::json>& reports) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : reports) {
    if (!r.is_object()) throw DataError("eval report must be a json object");
    for (const auto& [key, v] : r.items()) {
      if (v.is_number() && !v.is_boolean()) values[key].push_back(v.get<double>());
    }
  }
  std::map<std::string, AggregateStat> out;
  for (auto& [key, v] : values) {
    if (v.size() != reports.size()) continue;
    AggregateStat s;
    s.n = v.size();
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(s.n);
    double half = 0.0;
    if (s.n > 1) {
      double acc = 0.0;
      for (double x : v) acc += (x - s.mean) * (x - s.mean);
      half = 1.96 * std::sqrt(acc / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    out[key] = s;
  }
  return out;
}

}  // namespace incanom
