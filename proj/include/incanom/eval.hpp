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

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incanom/common.hpp"
#include "json.hpp"

namespace incanom {

// Raised when the labels do not contain both classes; callers skip the
// thresholded metrics instead of reporting NaN.
class SingleClassError : public Error {
 public:
  explicit SingleClassError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// Area under the exact step ROC; tied scores contribute diagonal segments,
// so the result equals P(s+ > s-) + 0.5 P(s+ = s-).
double RocAuc(std::span<const double> scores, std::span<const int> labels);

// Average precision: sum over distinct thresholds t (descending) of
// (R(t) - R(t_prev)) * P(t), with predictions s >= t.
double PrAuc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  long tn = 0;
  long fp = 0;
  long fn = 0;
  long tp = 0;
};

struct ThresholdMetrics {
  double threshold = 0.0;  // may be +inf (predict nothing positive)
  double youden_j = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double acc = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

ThresholdMetrics MetricsAt(std::span<const double> scores, std::span<const int> labels,
                           double threshold);

// Maximizes TPR - FPR over the distinct scores plus +inf, predicting 1 when
// s >= t. Ties in J go to the larger threshold.
ThresholdMetrics YoudenThreshold(std::span<const double> scores, std::span<const int> labels);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;
};

std::vector<CurvePoint> RocCurve(std::span<const double> scores, std::span<const int> labels);
std::vector<CurvePoint> PrCurve(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  std::size_t count = 0;
  std::size_t positives = 0;
  bool both_classes = false;
  std::optional<double> roc_auc;
  std::optional<double> pr_auc;
  std::optional<ThresholdMetrics> at_youden;
  std::vector<CurvePoint> roc_points;
  std::vector<CurvePoint> pr_points;
};

EvalReport Evaluate(std::span<const double> scores, std::span<const int> labels);

nlohmann::json ReportToJson(const EvalReport& report);
std::string CurveCsv(const std::vector<CurvePoint>& points, const char* x_name, const char* y_name);

struct AggregateStat {
  std::size_t n = 0;
  double mean = 0.0;
  double ci_low = 0.0;   // mean -/+ 1.96 * sample std / sqrt(n)
  double ci_high = 0.0;
};

// Aggregates the numeric top-level fields shared by several eval reports.
std::map<std::string, AggregateStat> AggregateReports(const std::vector<nlohmann::json>& reports);

}  // namespace incanom
