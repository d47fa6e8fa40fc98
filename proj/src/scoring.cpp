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

#include "incanom/scoring.hpp"

#include <algorithm>
#include <functional>

#include "incanom/binary_io.hpp"
#include "incanom/resize.hpp"

namespace incanom {

BankIndex::BankIndex(const MemoryBank& bank, Exec exec)
    : bank_(&bank),
      sq_norms_(kernels::RowSquaredNorms(bank.vectors.data.data(), bank.vectors.rows,
                                         bank.vectors.cols, exec)) {}

double TopQMean(std::span<const double> values, double top_q) {
  if (values.empty()) throw DataError("empty embeddings");
  if (!(top_q > 0.0 && top_q <= 1.0)) throw ConfigError("top_q must lie in (0, 1]");
  const std::size_t take = std::min(values.size(), FractionCount(top_q, values.size()));
  std::vector<double> sorted(values.begin(), values.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take), sorted.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += sorted[i];
  return sum / static_cast<double>(take);
}

namespace {

void CheckScoreInputs(const PatchEmbeddings& q, const BankIndex& index, const ScoreOptions& opts) {
  const auto& bank = index.bank();
  if (bank.size() == 0) throw DataError("empty memory bank");
  if (opts.k < 1) throw ConfigError("k must be positive");
  if (static_cast<std::size_t>(opts.k) > bank.size()) throw DataError("k exceeds memory");
  if (!(opts.top_q > 0.0 && opts.top_q <= 1.0)) throw ConfigError("top_q must lie in (0, 1]");
  if (q.patch_count() == 0) throw DataError("empty embeddings");
  if (static_cast<std::size_t>(q.dim) != bank.dim()) throw DataError("embedding dim mismatch with memory");
}

}  // namespace

ScoreResult ScoreImage(const PatchEmbeddings& q, const BankIndex& index, const ScoreOptions& opts,
                       Exec exec) {
  return ScoreImages(std::span<const PatchEmbeddings>(&q, 1), index, opts, exec).front();
}

std::vector<ScoreResult> ScoreImages(std::span<const PatchEmbeddings> images,
                                     const BankIndex& index, const ScoreOptions& opts, Exec exec) {
  std::size_t total = 0;
  for (const auto& q : images) {
    CheckScoreInputs(q, index, opts);
    total += q.patch_count();
  }
  std::vector<ScoreResult> out(images.size());
  if (images.empty()) return out;
  const std::size_t dim = index.bank().dim();
  std::vector<float> queries;
  queries.reserve(total * dim);
  for (const auto& q : images) queries.insert(queries.end(), q.vectors.begin(), q.vectors.end());
  const auto& bank = index.bank();
  auto patch = kernels::KnnScores(queries.data(), total, bank.vectors.data.data(), bank.size(), dim,
                                  index.sq_norms(), opts.k, opts.aggregate, exec);
  std::size_t off = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto& r = out[i];
    const std::size_t n = images[i].patch_count();
    r.grid_h = images[i].grid_h;
    r.grid_w = images[i].grid_w;
    r.k = opts.k;
    r.top_q = opts.top_q;
    r.patch_scores.assign(patch.begin() + static_cast<std::ptrdiff_t>(off),
                          patch.begin() + static_cast<std::ptrdiff_t>(off + n));
    r.image_score = TopQMean(r.patch_scores, opts.top_q);
    off += n;
  }
  return out;
}

Heatmap RenderHeatmap(const ScoreResult& score, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ConfigError("heatmap size must be positive");
  if (score.patch_scores.size() != static_cast<std::size_t>(score.grid_h) * score.grid_w ||
      score.patch_scores.empty()) {
    throw DataError("heatmap needs a full patch-score grid");
  }
  std::vector<double> up(static_cast<std::size_t>(out_h) * out_w);
  ResizeBilinear(score.patch_scores.data(), 1, score.grid_h, score.grid_w, up.data(), out_h, out_w);
  auto [lo_it, hi_it] = std::minmax_element(up.begin(), up.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Heatmap map;
  map.height = out_h;
  map.width = out_w;
  map.values.assign(up.size(), 0.0f);
  if (hi > lo) {
    for (std::size_t i = 0; i < up.size(); ++i) map.values[i] = static_cast<float>((up[i] - lo) / (hi - lo));
  }
  return map;
}

void WriteHeatmap(const Heatmap& map, const std::filesystem::path& path) {
  BinaryWriter w;
  w.Bytes("CGHM");
  w.U16(1);
  w.U32(static_cast<std::uint32_t>(map.height));
  w.U32(static_cast<std::uint32_t>(map.width));
  for (float v : map.values) w.F32(v);
  WriteFileAtomic(path, w.data());
}

Heatmap ReadHeatmap(const std::filesystem::path& path) {
  BinaryReader r(ReadFileBytes(path));
  if (r.remaining() < 4 || r.Bytes(4) != "CGHM") throw FormatError(FormatFault::kBadMagic, "bad magic: not a heatmap");
  if (r.U16() != 1) throw FormatError(FormatFault::kVersionMismatch, "heatmap version mismatch");
  Heatmap map;
  map.height = static_cast<int>(r.U32());
  map.width = static_cast<int>(r.U32());
  map.values.resize(static_cast<std::size_t>(map.height) * map.width);
  for (auto& v : map.values) v = r.F32();
  if (!r.at_end()) throw FormatError(FormatFault::kCorrupt, "trailing bytes in heatmap");
  return map;
}

}  // namespace incanom
