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
#include <span>
#include <vector>

#include "incanom/common.hpp"
#include "incanom/kernels.hpp"

namespace incanom {

// One scale of the adapter: 1x1 projection, channel normalization with
// trainable scale/shift and running statistics, then ReLU.
struct ScaleParams {
  int in_channels = 0;
  int out_dim = 0;
  std::vector<double> weight;  // out_dim x in_channels
  std::vector<double> bias;
  std::vector<double> norm_scale;
  std::vector<double> norm_shift;
  std::vector<double> running_mean;
  std::vector<double> running_var;

  bool operator==(const ScaleParams&) const = default;
};

struct AdapterParams {
  int out_dim = 0;
  std::vector<ScaleParams> scales;
  double norm_momentum = 0.1;
  double norm_eps = 1e-5;

  int embedding_dim() const { return out_dim * static_cast<int>(scales.size()); }
  bool operator==(const AdapterParams&) const = default;
};

enum class Mode { kTrain, kEval };

// He-initialized weights, zero bias, unit scale, zero shift, running stats (0, 1).
AdapterParams InitAdapter(std::span<const int> in_channels, int out_dim, std::uint64_t rng_seed);

// Sets running statistics to the population moments of the projected
// features over `images`, so eval-mode output starts out normalized.
void InitRunningStats(AdapterParams& params, std::span<const MultiScaleFeatures* const> images);

// Trainable values (weight, bias, scale, shift of each scale, in that order)
// as one flat vector. Running statistics are not trainable.
std::size_t TrainableCount(const AdapterParams& params);
std::vector<double> FlattenTrainable(const AdapterParams& params);
void AssignTrainable(AdapterParams& params, std::span<const double> values);

// Eval-mode forward pass for one image: per-scale projection, bilinear
// alignment to the largest grid, channel concatenation, row L2 normalization.
PatchEmbeddings Embed(const MultiScaleFeatures& features, const AdapterParams& params,
                      Exec exec = Exec::kParallel);

// Train-mode forward over a batch (statistics pooled over every location of
// every image). Updates the running statistics with the configured momentum.
std::vector<PatchEmbeddings> ForwardTrain(std::span<const MultiScaleFeatures* const> batch,
                                          AdapterParams& params, Exec exec = Exec::kParallel);

struct PrototypeSet {
  Matrix vectors;  // unit rows
};

// Mean over patches of the Euclidean distance to the nearest prototype.
double PrototypeLoss(const PatchEmbeddings& q, const PrototypeSet& protos);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // FlattenTrainable layout
};

// Train-mode prototype loss over the pooled patches of `batch` and its exact
// gradient. Nearest-prototype ties resolve to the lowest index; patches that
// coincide with their prototype contribute no gradient.
LossGradient ComputeLossGradient(std::span<const MultiScaleFeatures* const> batch,
                                 const AdapterParams& params, const PrototypeSet& protos,
                                 Exec exec = Exec::kParallel);

// Train-mode loss without side effects, in double precision.
double TrainLoss(std::span<const MultiScaleFeatures* const> batch, const AdapterParams& params,
                 const PrototypeSet& protos);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamState&) const = default;
};

AdamState MakeAdam(const AdapterParams& params, double lr);
void AdamStep(AdapterParams& params, std::span<const double> gradient, AdamState& state);

using EpochHook = std::function<void(int epoch, const AdapterParams& params)>;

struct TrainOptions {
  int epochs = 5;
  int batch_size = 32;
  std::uint64_t rng_seed = 123;
  EpochHook on_epoch;  // called after each epoch
};

// Minibatch Adam on the prototype loss. The order of `images` is reshuffled
// each epoch with a generator derived from (rng_seed, epoch).
// Returns the mean batch loss of each epoch.
std::vector<double> TrainEpochs(std::span<const MultiScaleFeatures* const> images,
                                AdapterParams& params, AdamState& optimizer,
                                const PrototypeSet& protos, const TrainOptions& opts,
                                Exec exec = Exec::kParallel);

struct WarmupOptions {
  int epochs = 5;
  double lr = 1e-4;
  int batch_size = 32;
  int proto_budget = 2048;
  std::uint64_t rng_seed = 123;
  EpochHook on_epoch;
};

struct WarmupResult {
  AdapterParams params;
  AdamState optimizer;
  PrototypeSet prototypes;
  std::vector<double> epoch_losses;
};

// Builds prototypes from the native-grid seed embeddings with
// ratio min(1, budget / |V_seed|) and trains for `epochs` epochs.
WarmupResult Warmup(std::span<const MultiScaleFeatures* const> seed, AdapterParams params,
                    const WarmupOptions& opts, Exec exec = Exec::kParallel);

// Prototypes as the farthest-first coreset of `vectors` with the given budget.
PrototypeSet SelectPrototypes(const Matrix& vectors, int budget, Exec exec = Exec::kParallel);

// Mean eval-mode prototype loss across images (per-image patch means averaged
// with equal patch weight).
double MeanPrototypeLoss(std::span<const MultiScaleFeatures* const> images,
                         const AdapterParams& params, const PrototypeSet& protos);

}  // namespace incanom
