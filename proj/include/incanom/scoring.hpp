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

#include <filesystem>
#include <span>
#include <vector>

#include "incanom/common.hpp"
#include "incanom/kernels.hpp"
#include "incanom/memory.hpp"

namespace incanom {

struct ScoreOptions {
  int k = 3;
  double top_q = 0.03;
  KnnAggregate aggregate = KnnAggregate::kMean;
};

struct ScoreResult {
  double image_score = 0.0;
  int grid_h = 0;
  int grid_w = 0;
  std::vector<double> patch_scores;  // row-major grid
  int k = 0;
  double top_q = 0.0;
};

// Memory bank plus cached row norms, shared across many scoring calls.
class BankIndex {
 public:
  explicit BankIndex(const MemoryBank& bank, Exec exec = Exec::kParallel);

  const MemoryBank& bank() const { return *bank_; }
  std::span<const double> sq_norms() const { return sq_norms_; }

 private:
  const MemoryBank* bank_;
  std::vector<double> sq_norms_;
};

// Mean of the largest max(1, ceil(top_q * P)) entries.
double TopQMean(std::span<const double> values, double top_q);

ScoreResult ScoreImage(const PatchEmbeddings& q, const BankIndex& index, const ScoreOptions& opts,
                       Exec exec = Exec::kParallel);

// Scores several images in one pass, parallel over all of their patches.
std::vector<ScoreResult> ScoreImages(std::span<const PatchEmbeddings> images,
                                     const BankIndex& index, const ScoreOptions& opts,
                                     Exec exec = Exec::kParallel);

struct Heatmap {
  int height = 0;
  int width = 0;
  std::vector<float> values;  // in [0, 1]
};

// Bilinear upsampling of the patch-score grid followed by per-image min-max
// normalization. A constant map exports as all zeros.
Heatmap RenderHeatmap(const ScoreResult& score, int out_h, int out_w);

// "CGHM", u16 version 1, u32 height, u32 width, float32 LE payload.
void WriteHeatmap(const Heatmap& map, const std::filesystem::path& path);
Heatmap ReadHeatmap(const std::filesystem::path& path);

}  // namespace incanom
