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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incanom/checkpoint.hpp"
#include "incanom/gating.hpp"
#include "incanom/pipeline.hpp"

namespace incanom {

enum class ResumePolicy { kBestSoFar, kLast };
enum class TauPolicy { kReset, kPersist };

ResumePolicy ParseResumePolicy(const std::string& s);
std::string ToString(ResumePolicy p);
TauPolicy ParseTauPolicy(const std::string& s);
std::string ToString(TauPolicy p);

struct RoundConfig {
  int rounds = 5;
  int budget = 200;
  bool strict_normal_only = false;
  ResumePolicy resume_policy = ResumePolicy::kBestSoFar;
  RankMode rank_mode = RankMode::kBoundary;
  double fine_tune_lr = 3e-5;
  TauPolicy tau_policy = TauPolicy::kReset;
  std::uint64_t rng_seed = 123;
  double metric_pool_fraction = 0.25;
  bool freeze_seed_memory = false;  // rebuild memory from the seed only

  void Validate() const;
};

struct RoundInputs {
  const EmbeddingSet* features = nullptr;
  std::vector<int> seed_ids;
  std::vector<int> pool_ids;
  std::map<int, int> labels;         // id -> 0/1; drives the strict filter and reporting only
  std::vector<int> validation_ids;   // optional labelled validation set
};

struct GateLogRow {
  int round = 0;
  int id = 0;
  double s = 0.0;
  double u = 0.0;
  double z_s = 0.0;
  double z_u = 0.0;
  double tau = 0.0;
  bool admitted = false;
  int rank = 0;
};

std::string GateLogHeader();
std::string FormatGateLogRow(const GateLogRow& row);

struct RoundRecord {
  int round = 0;
  std::size_t scored = 0;
  std::size_t safe = 0;
  double tau_used = kTauStrict;
  std::vector<int> selected;  // global ids, ranked
  std::vector<int> admitted;  // global ids added to the accepted set
  std::size_t admitted_anomalies = 0;
  std::size_t normals_scored = 0;
  double alpha = 0.0;  // admitted anomalies / admitted
  double beta = 0.0;   // admitted normals / normals scored
  std::size_t memory_size = 0;
  std::size_t memory_anomaly_rows = 0;  // bank rows sourced from label-1 images
  bool fine_tuned = false;
  std::string note;   // why the round ended early, if it did
  double metric = 0.0;
  bool improved = false;
  std::vector<double> metric_seed_scores;
  std::vector<double> metric_pool_scores;
};

struct ContaminationReport {
  std::vector<RoundRecord> rounds;

  std::string Csv() const;
};

struct RoundSink {
  std::function<void(const std::vector<GateLogRow>&)> on_gates;
  std::function<void(const RoundRecord&)> on_round;
  std::function<void(const Checkpoint&)> on_last;
  std::function<void(const Checkpoint&)> on_best;
};

struct RoundsResult {
  AdapterParams adapter;  // restored best_overall
  MemoryBank memory;      // built from seed and accepted ids with `adapter`
  RoundState state;
  SwagState swag;
  AdamState optimizer;
  ContaminationReport report;
  std::vector<GateLogRow> gate_log;
};

// Pre-round checkpoint material: the warmed adapter, its optimizer and the
// SWAG posterior.
struct RoundStart {
  AdapterParams params;
  AdamState optimizer;
  SwagState swag;
};

// Resumes a partially completed run from its last and best checkpoints.
struct RoundResume {
  Checkpoint last;
  Checkpoint best;
};

// The fixed metric subset: all seed ids plus a seeded fraction of the pool.
struct MetricSubset {
  std::vector<int> seed_ids;
  std::vector<int> pool_ids;
};

MetricSubset ChooseMetricSubset(const RoundInputs& in, const RoundConfig& cfg);

struct MetricValue {
  double value = 0.0;
  std::vector<double> seed_scores;  // empty when validation AUC is used
  std::vector<double> pool_scores;
};

// Validation ROC-AUC against the seed-and-accepted memory when validation ids
// with both classes are present; otherwise mean pool score minus mean seed
// score on the fixed subset against the seed-only memory.
MetricValue CheckpointMetric(const RoundInputs& in, const MetricSubset& subset,
                             const std::vector<int>& accepted, const AdapterParams& params,
                             const PipelineOptions& opts);

RoundsResult RunRounds(const RoundInputs& in, const RoundStart& start, const GateCalibration& calib,
                       const RoundConfig& cfg, const PipelineOptions& opts,
                       const RoundSink& sink = {}, const std::optional<RoundResume>& resume = {});

}  // namespace incanom
