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

#include <cstddef>
#include <span>
#include <vector>

#include "incanom/common.hpp"
#include "incanom/kernels.hpp"

namespace incanom {

// Greedy farthest-first (k-center) selection over the rows of `candidates`.
// Picks max(1, ceil(ratio * N)) rows starting from row `start`; each further
// pick maximizes the Euclidean distance to the nearest already-picked row,
// ties broken toward the lowest index. Returns indices in selection order.
std::vector<std::size_t> CoresetGreedy(const Matrix& candidates, double ratio,
                                       std::size_t start = 0, Exec exec = Exec::kParallel);

enum class MemorySource { kSeed, kSeedAndAccepted };

struct MemoryBank {
  Matrix vectors;               // unit rows
  std::vector<int> source_ids;  // originating image per row
  MemorySource built_from = MemorySource::kSeed;
  double coreset_ratio = 0.3;

  std::size_t size() const { return vectors.rows; }
  std::size_t dim() const { return vectors.cols; }
};

struct MemoryOptions {
  double coreset_ratio = 0.3;
  int grid_cap = 16;  // per-image grid is resized down to at most cap x cap
  std::size_t start = 0;
};

// Caps an embedding grid at cap x cap by bilinear resizing and re-normalizes
// each row. Grids already within the cap are returned unchanged.
PatchEmbeddings CapGrid(const PatchEmbeddings& q, int cap);

// Flattens the (capped) patch vectors of every image in order and keeps the
// farthest-first coreset of them.
MemoryBank BuildMemory(std::span<const PatchEmbeddings> images, std::span<const int> image_ids,
                       const MemoryOptions& opts, MemorySource source = MemorySource::kSeed,
                       Exec exec = Exec::kParallel);

// Max over candidates of the distance to the nearest selected row.
double CoveringRadius(const Matrix& candidates, std::span<const std::size_t> selected);

}  // namespace incanom
