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

#include "incanom/pipeline.hpp"

#include <algorithm>

namespace incanom {

UncertaintyOptions PipelineOptions::uncertainty() const {
  UncertaintyOptions u;
  u.samples = swag_samples;
  u.noise_scale = swag_noise;
  u.global_seed = swag_seed;
  u.score = score;
  return u;
}

std::vector<const MultiScaleFeatures*> Gather(const EmbeddingSet& set, std::span<const int> ids) {
  std::vector<const MultiScaleFeatures*> out;
  out.reserve(ids.size());
  for (int id : ids) {
    auto it = set.find(id);
    if (it == set.end()) throw DataError("missing embeddings for id " + std::to_string(id));
    out.push_back(&it->second);
  }
  return out;
}

std::vector<PatchEmbeddings> EmbedIds(const EmbeddingSet& set, std::span<const int> ids,
                                      const AdapterParams& params, Exec exec) {
  auto feats = Gather(set, ids);
  std::vector<PatchEmbeddings> out;
  out.reserve(feats.size());
  for (const auto* f : feats) out.push_back(Embed(*f, params, exec));
  return out;
}

MemoryBank BuildMemoryForIds(const EmbeddingSet& set, std::span<const int> ids,
                             const AdapterParams& params, const MemoryOptions& opts,
                             MemorySource source, Exec exec) {
  auto q = EmbedIds(set, ids, params, exec);
  return BuildMemory(q, ids, opts, source, exec);
}

std::vector<ScoreResult> ScoreIdsFull(const EmbeddingSet& set, std::span<const int> ids,
                                      const AdapterParams& params, const BankIndex& index,
                                      const ScoreOptions& opts, Exec exec) {
  auto q = EmbedIds(set, ids, params, exec);
  return ScoreImages(q, index, opts, exec);
}

std::vector<double> ScoreIds(const EmbeddingSet& set, std::span<const int> ids,
                             const AdapterParams& params, const BankIndex& index,
                             const ScoreOptions& opts, Exec exec) {
  auto full = ScoreIdsFull(set, ids, params, index, opts, exec);
  std::vector<double> out(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].image_score;
  return out;
}

std::vector<double> UncertaintyIds(const EmbeddingSet& set, std::span<const int> ids,
                                   const SwagState& swag, const AdapterParams& params,
                                   const BankIndex& index, const UncertaintyOptions& opts) {
  if (opts.samples < 1) throw ConfigError("swag samples must be at least 1");
  if (swag.snapshot_count < 1) throw DataError("swag has zero snapshots");
  auto feats = Gather(set, ids);
  std::vector<double> out(ids.size(), 0.0);
  // A zero-variance posterior samples the mean weights exactly, so every
  // sampled score is identical and u = 0 without evaluating them.
  const auto var = SwagVariance(swag);
  const bool degenerate =
      opts.noise_scale == 0.0 || std::all_of(var.begin(), var.end(), [](double v) { return v == 0.0; });
  if (degenerate) return out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[i] = EstimateUncertainty(*feats[i], ids[i], swag, params, index, opts).value;
  }
  return out;
}

WarmupStage RunWarmupStage(const EmbeddingSet& set, std::span<const int> seed_ids,
                           const PipelineOptions& opts) {
  if (seed_ids.empty()) throw DataError("empty seed");
  auto seed = Gather(set, seed_ids);
  std::vector<int> in_channels;
  for (const auto& s : seed.front()->scales) in_channels.push_back(s.channels);
  for (const auto* f : seed) {
    ValidateFeatures(*f);
    if (f->scales.size() != in_channels.size()) throw DataError("channel mismatch");
    for (std::size_t i = 0; i < in_channels.size(); ++i) {
      if (f->scales[i].channels != in_channels[i]) throw DataError("channel mismatch");
    }
  }
  AdapterParams params = InitAdapter(in_channels, opts.out_dim, opts.adapter_seed);
  InitRunningStats(params, seed);

  WarmupStage out;
  WarmupOptions wopts = opts.warmup;
  std::vector<AdapterParams> late;
  if (opts.swag_warmup == SwagWarmup::kLastTwo) {
    const int last = wopts.epochs - 1;
    wopts.on_epoch = [&late, last](int epoch, const AdapterParams& p) {
      if (epoch >= last - 1) late.push_back(p);
    };
  }
  auto warm = Warmup(seed, std::move(params), wopts, opts.exec);
  out.params = std::move(warm.params);
  out.optimizer = std::move(warm.optimizer);
  out.prototypes = std::move(warm.prototypes);
  out.epoch_losses = std::move(warm.epoch_losses);
  out.swag.noise_scale = opts.swag_noise;
  if (late.size() == 2) {
    SwagSnapshot(out.swag, late[0]);
    SwagSnapshot(out.swag, late[1]);
  } else {
    SwagSnapshot(out.swag, out.params);
    SwagSnapshot(out.swag, out.params);
  }
  return out;
}

CalibrationStage RunCalibrationStage(const EmbeddingSet& set, std::span<const int> seed_ids,
                                     const AdapterParams& params, const SwagState& swag,
                                     const PipelineOptions& opts) {
  if (seed_ids.empty()) throw DataError("empty seed");
  const auto bank = BuildMemoryForIds(set, seed_ids, params, opts.memory, MemorySource::kSeed, opts.exec);
  const BankIndex index(bank, opts.exec);
  CalibrationStage out;
  out.seed_scores = ScoreIds(set, seed_ids, params, index, opts.score, opts.exec);
  out.seed_uncerts = UncertaintyIds(set, seed_ids, swag, params, index, opts.uncertainty());
  out.calibration = Calibrate(out.seed_scores, out.seed_uncerts);
  return out;
}

EvalStage RunEvalStage(const EmbeddingSet& set, std::span<const int> ids,
                       std::span<const int> labels, const AdapterParams& params,
                       const MemoryBank& bank, const ScoreOptions& opts, Exec exec) {
  if (ids.size() != labels.size()) throw DataError("ids and labels differ in length");
  if (ids.empty()) throw DataError("empty test set");
  const BankIndex index(bank, exec);
  EvalStage out;
  out.ids.assign(ids.begin(), ids.end());
  out.labels.assign(labels.begin(), labels.end());
  out.scores = ScoreIds(set, ids, params, index, opts, exec);
  out.report = Evaluate(out.scores, out.labels);
  return out;
}

}  // namespace incanom
