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
#include "incanom/scoring.hpp"

namespace incanom {

// Diagonal SWAG: equal-weight running first and second moments of the
// flattened trainable adapter values.
struct SwagState {
  std::vector<double> mean;
  std::vector<double> sq_mean;
  std::int64_t snapshot_count = 0;
  double noise_scale = 0.02;

  bool operator==(const SwagState&) const = default;
};

void SwagSnapshot(SwagState& state, const AdapterParams& params);

// max(sq_mean - mean^2, 0), elementwise.
std::vector<double> SwagVariance(const SwagState& state);

// mean + noise_scale * sqrt(var) * eps with eps ~ N(0, 1) drawn from
// rng_seed. Running statistics and shapes come from `base`.
AdapterParams SampleAdapter(const SwagState& state, const AdapterParams& base,
                            std::uint64_t rng_seed, double noise_scale);

struct UncertaintyOptions {
  int samples = 4;
  double noise_scale = 0.02;
  std::uint64_t global_seed = 123;
  ScoreOptions score;
};

struct Uncertainty {
  double value = 0.0;                // population variance of sample_scores
  std::vector<double> sample_scores;
};

// Per-sample seeds are MixSeed(global_seed, image_id, sample), so the result
// depends only on the image and never on evaluation order.
Uncertainty EstimateUncertainty(const MultiScaleFeatures& features, int image_id,
                                const SwagState& state, const AdapterParams& base,
                                const BankIndex& bank, const UncertaintyOptions& opts);

double PopulationVariance(std::span<const double> values);

}  // namespace incanom
