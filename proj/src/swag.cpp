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

#include "incanom/swag.hpp"

#include <cmath>

namespace incanom {

void SwagSnapshot(SwagState& state, const AdapterParams& params) {
  auto theta = FlattenTrainable(params);
  for (double v : theta) {
    if (!std::isfinite(v)) throw NumericError("swag snapshot: non-finite params");
  }
  if (state.snapshot_count == 0) {
    state.mean.assign(theta.size(), 0.0);
    state.sq_mean.assign(theta.size(), 0.0);
  } else if (state.mean.size() != theta.size()) {
    throw DataError("swag snapshot: parameter count changed");
  }
  state.snapshot_count += 1;
  const double n = static_cast<double>(state.snapshot_count);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.mean[i] = ((n - 1.0) * state.mean[i] + theta[i]) / n;
    state.sq_mean[i] = ((n - 1.0) * state.sq_mean[i] + theta[i] * theta[i]) / n;
  }
}

std::vector<double> SwagVariance(const SwagState& state) {
  std::vector<double> var(state.mean.size());
  for (std::size_t i = 0; i < var.size(); ++i) {
    double v = state.sq_mean[i] - state.mean[i] * state.mean[i];
    var[i] = v > 0.0 ? v : 0.0;
  }
  return var;
}

AdapterParams SampleAdapter(const SwagState& state, const AdapterParams& base,
                            std::uint64_t rng_seed, double noise_scale) {
  if (state.snapshot_count < 1) throw DataError("swag has zero snapshots");
  if (state.mean.size() != TrainableCount(base)) throw DataError("swag state does not match adapter");
  const auto var = SwagVariance(state);
  Rng rng(rng_seed);
  std::vector<double> theta(state.mean.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double eps = rng.Normal();
    theta[i] = state.mean[i] + (noise_scale * std::sqrt(var[i])) * eps;
  }
  AdapterParams out = base;
  AssignTrainable(out, theta);
  return out;
}

double PopulationVariance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size());
}

Uncertainty EstimateUncertainty(const MultiScaleFeatures& features, int image_id,
                                const SwagState& state, const AdapterParams& base,
                                const BankIndex& bank, const UncertaintyOptions& opts) {
  if (opts.samples < 1) throw ConfigError("swag samples must be at least 1");
  Uncertainty out;
  out.sample_scores.reserve(static_cast<std::size_t>(opts.samples));
  for (int k = 0; k < opts.samples; ++k) {
    const auto seed = MixSeed(opts.global_seed, static_cast<std::uint64_t>(image_id),
                              static_cast<std::uint64_t>(k));
    const auto sampled = SampleAdapter(state, base, seed, opts.noise_scale);
    const auto q = Embed(features, sampled);
    out.sample_scores.push_back(ScoreImage(q, bank, opts.score).image_score);
  }
  out.value = PopulationVariance(out.sample_scores);
  return out;
}

}  // namespace incanom
