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
#include <optional>
#include <string>
#include <vector>

#include "incanom/dataio.hpp"
#include "incanom/embedding_file.hpp"
#include "incanom/eval.hpp"
#include "incanom/pipeline.hpp"
#include "incanom/rounds.hpp"

namespace incanom {

// Synthetic normal/anomaly populations injected as one-scale feature maps.
// Normal patches are drawn around one of `n_modes` centers with noise_std
// spread inside a random `noise_rank`-dimensional subspace plus
// off_manifold_noise * noise_std isotropic jitter. An anomalous image shifts a
// fraction of its patches by margin * noise_std along a fixed unit direction
// orthogonal to that subspace.
struct SynthSpec {
  int dim = 16;
  int n_seed = 60;
  int n_pool_normal = 100;
  int n_pool_anomaly = 60;
  int n_test_normal = 50;
  int n_test_anomaly = 50;
  double margin = 0.0;
  double noise_std = 1.0;
  std::uint64_t rng_seed = 123;
  int grid = 4;
  int n_modes = 4;
  double center_spread = 4.0;
  double anomaly_patch_fraction = 0.25;
  int noise_rank = 4;  // 0: isotropic in all dims
  double off_manifold_noise = 0.1;

  void Validate() const;
};

struct SynthData {
  Manifest manifest;
  EmbeddingSet embeddings;
  SplitResult split;
  std::vector<int> test_ids;
};

SynthData Generate(const SynthSpec& spec);

// Pipeline settings sized for synthetic runs.
struct SynthExperiment {
  PipelineOptions pipeline;
  RoundConfig rounds;

  static SynthExperiment Defaults();
};

struct SynthRun {
  WarmupStage warmup;
  CalibrationStage calibration;
  RoundsResult rounds;
  std::optional<EvalStage> eval;
  double separation = 0.0;  // mean pool-anomaly z_s minus mean pool-normal z_s, round 1
};

RoundInputs MakeRoundInputs(const SynthData& data);

SynthRun RunSynthPipeline(const SynthData& data, const SynthExperiment& exp, bool evaluate = true);

// Raised when a strict-mode run admits or memorizes an anomaly.
class ContaminationError : public Error {
 public:
  explicit ContaminationError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

ContaminationReport VerifyTheorem1(const SynthSpec& spec, SynthExperiment exp);

struct SweepRow {
  double margin = 0.0;
  int K = 0;
  double alpha = 0.0;  // fraction of pool anomalies ever admitted
  double beta = 0.0;   // fraction of pool normals ever admitted
  std::uint64_t seed = 0;
  double separation = 0.0;
};

std::vector<SweepRow> SweepProp1(const SynthSpec& base, const std::vector<double>& margins,
                                 const std::vector<int>& k_values,
                                 const std::vector<std::uint64_t>& seeds, SynthExperiment exp);

std::string SweepCsv(const std::vector<SweepRow>& rows);

struct TrendCheck {
  std::vector<double> margins;     // ascending
  std::vector<double> mean_alpha;  // per margin, averaged over seeds and K
  std::vector<double> mean_beta;
  int inversions = 0;              // adjacent increases in mean alpha
  double max_alpha_at_3 = 0.0;     // worst mean alpha among margins >= 3
};

TrendCheck CheckTrend(const std::vector<SweepRow>& rows);

struct Comparison {
  double baseline_auc = 0.0;
  double proposed_auc = 0.0;
};

// Baseline: untrained adapter (running statistics from the seed only), memory
// from seed plus the whole pool, no gating.
double BaselineAuc(const SynthData& data, const SynthExperiment& exp);

Comparison CompareWithBaseline(const SynthSpec& spec, const SynthExperiment& exp);

}  // namespace incanom
