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

#include "incanom/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "incanom/resize.hpp"

namespace incanom {

std::vector<std::size_t> CoresetGreedy(const Matrix& candidates, double ratio, std::size_t start,
                                       Exec exec) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("invalid ratio");
  const std::size_t n = candidates.rows;
  if (n == 0) throw DataError("coreset needs at least one candidate");
  if (start >= n) throw ConfigError("coreset start index out of range");
  const std::size_t k = std::min(n, FractionCount(ratio, n));

  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  std::size_t next = start;
  while (true) {
    picked.push_back(next);
    min_sq[next] = -1.0;
    if (picked.size() == k) break;
    kernels::UpdateMinSquaredDistance(candidates, next, min_sq, exec);
    next = kernels::ArgMaxEligible(min_sq, exec);
  }
  return picked;
}

PatchEmbeddings CapGrid(const PatchEmbeddings& q, int cap) {
  if (cap < 1) throw ConfigError("grid cap must be positive");
  if (q.grid_h <= cap && q.grid_w <= cap) return q;
  const int oh = std::min(q.grid_h, cap);
  const int ow = std::min(q.grid_w, cap);
  const std::size_t in_locs = q.patch_count();
  const std::size_t dim = static_cast<std::size_t>(q.dim);
  std::vector<float> chw(dim * in_locs);
  for (std::size_t p = 0; p < in_locs; ++p) {
    for (std::size_t c = 0; c < dim; ++c) chw[c * in_locs + p] = q.vectors[p * dim + c];
  }
  const std::size_t out_locs = static_cast<std::size_t>(oh) * ow;
  std::vector<float> small(dim * out_locs);
  ResizeBilinear(chw.data(), q.dim, q.grid_h, q.grid_w, small.data(), oh, ow);
  PatchEmbeddings out;
  out.grid_h = oh;
  out.grid_w = ow;
  out.dim = q.dim;
  out.vectors.resize(out_locs * dim);
  for (std::size_t p = 0; p < out_locs; ++p) {
    double norm = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      double v = small[c * out_locs + p];
      norm += v * v;
    }
    const double inv = 1.0 / (std::sqrt(norm) + 1e-12);
    for (std::size_t c = 0; c < dim; ++c) {
      out.vectors[p * dim + c] = static_cast<float>(small[c * out_locs + p] * inv);
    }
  }
  return out;
}

MemoryBank BuildMemory(std::span<const PatchEmbeddings> images, std::span<const int> image_ids,
                       const MemoryOptions& opts, MemorySource source, Exec exec) {
  if (images.empty()) throw DataError("memory needs at least one image");
  if (images.size() != image_ids.size()) throw DataError("memory image/id count mismatch");
  const int dim = images.front().dim;
  std::size_t total = 0;
  std::vector<PatchEmbeddings> capped;
  capped.reserve(images.size());
  for (const auto& q : images) {
    if (q.dim != dim) throw DataError("memory images disagree on embedding dim");
    capped.push_back(CapGrid(q, opts.grid_cap));
    total += capped.back().patch_count();
  }
  Matrix all(total, static_cast<std::size_t>(dim));
  std::vector<int> owner(total);
  std::size_t row = 0;
  for (std::size_t i = 0; i < capped.size(); ++i) {
    const auto& q = capped[i];
    std::copy(q.vectors.begin(), q.vectors.end(), all.data.begin() + static_cast<std::ptrdiff_t>(row * dim));
    std::fill(owner.begin() + static_cast<std::ptrdiff_t>(row),
              owner.begin() + static_cast<std::ptrdiff_t>(row + q.patch_count()), image_ids[i]);
    row += q.patch_count();
  }
  const auto picks = CoresetGreedy(all, opts.coreset_ratio, opts.start, exec);
  MemoryBank bank;
  bank.vectors = Matrix(picks.size(), static_cast<std::size_t>(dim));
  bank.source_ids.resize(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    auto src = all.row(picks[i]);
    std::copy(src.begin(), src.end(), bank.vectors.row(i).begin());
    bank.source_ids[i] = owner[picks[i]];
  }
  bank.built_from = source;
  bank.coreset_ratio = opts.coreset_ratio;
  return bank;
}

double CoveringRadius(const Matrix& candidates, std::span<const std::size_t> selected) {
  double worst = 0.0;
  for (std::size_t i = 0; i < candidates.rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : selected) {
      best = std::min(best, kernels::SquaredDistance(candidates.row(i), candidates.row(s)));
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace incanom
