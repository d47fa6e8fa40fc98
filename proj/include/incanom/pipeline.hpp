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
#include <span>
#include <vector>

#include "incanom/adapter.hpp"
#include "incanom/embedding_file.hpp"
#include "incanom/eval.hpp"
#include "incanom/gating.hpp"
#include "incanom/memory.hpp"
#include "incanom/scoring.hpp"
#include "incanom/swag.hpp"

namespace incanom {

// How the two warm-up SWAG snapshots are taken.
enum class SwagWarmup {
  kIdentical,  // both from the final warmed weights (zero posterior variance)
  kLastTwo,    // after each of the last two warm-up epochs
};

struct PipelineOptions {
  int out_dim = 256;
  std::uint64_t adapter_seed = 123;
  WarmupOptions warmup;
  MemoryOptions memory;
  ScoreOptions score;
  int swag_samples = 4;
  double swag_noise = 0.02;
  std::uint64_t swag_seed = 123;
  SwagWarmup swag_warmup = SwagWarmup::kIdentical;
  Exec exec = Exec::kParallel;

  UncertaintyOptions uncertainty() const;
};

// Feature pointers for `ids` in order; throws naming the first missing id.
std::vector<const MultiScaleFeatures*> Gather(const EmbeddingSet& set, std::span<const int> ids);

std::vector<PatchEmbeddings> EmbedIds(const EmbeddingSet& set, std::span<const int> ids,
                                      const AdapterParams& params, Exec exec = Exec::kParallel);

MemoryBank BuildMemoryForIds(const EmbeddingSet& set, std::span<const int> ids,
                             const AdapterParams& params, const MemoryOptions& opts,
                             MemorySource source, Exec exec = Exec::kParallel);

std::vector<ScoreResult> ScoreIdsFull(const EmbeddingSet& set, std::span<const int> ids,
                                      const AdapterParams& params, const BankIndex& index,
                                      const ScoreOptions& opts, Exec exec = Exec::kParallel);

std::vector<double> ScoreIds(const EmbeddingSet& set, std::span<const int> ids,
                             const AdapterParams& params, const BankIndex& index,
                             const ScoreOptions& opts, Exec exec = Exec::kParallel);

std::vector<double> UncertaintyIds(const EmbeddingSet& set, std::span<const int> ids,
                                   const SwagState& swag, const AdapterParams& params,
                                   const BankIndex& index, const UncertaintyOptions& opts);

struct WarmupStage {
  AdapterParams params;
  AdamState optimizer;
  SwagState swag;
  PrototypeSet prototypes;
  std::vector<double> epoch_losses;
};

// Initializes the adapter from the seed features, warms it up and takes the
// two initial SWAG snapshots.
WarmupStage RunWarmupStage(const EmbeddingSet& set, std::span<const int> seed_ids,
                           const PipelineOptions& opts);

struct CalibrationStage {
  GateCalibration calibration;
  std::vector<double> seed_scores;
  std::vector<double> seed_uncerts;
};

CalibrationStage RunCalibrationStage(const EmbeddingSet& set, std::span<const int> seed_ids,
                                     const AdapterParams& params, const SwagState& swag,
                                     const PipelineOptions& opts);

struct EvalStage {
  std::vector<int> ids;
  std::vector<int> labels;
  std::vector<double> scores;
  EvalReport report;
};

EvalStage RunEvalStage(const EmbeddingSet& set, std::span<const int> ids,
                       std::span<const int> labels, const AdapterParams& params,
                       const MemoryBank& bank, const ScoreOptions& opts,
                       Exec exec = Exec::kParallel);

}  // namespace incanom
