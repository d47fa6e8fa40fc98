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
#include <filesystem>
#include <string>
#include <vector>

#include "incanom/featurizer.hpp"
#include "incanom/pipeline.hpp"
#include "incanom/rounds.hpp"

namespace incanom {

// Every tunable of a run. Text form: one `key = value` per line, `#` starts
// a comment. Unknown keys are rejected.
struct RunConfig {
  // data
  double seed_fraction = 0.30;
  std::uint64_t split_seed = 123;
  int image_size = 256;
  std::string color = "gray";  // gray | rgb
  // featurizer
  std::uint64_t featurizer_seed = 7;
  int channels_fine = 32;
  int channels_coarse = 64;
  // adapter and warm-up
  int out_dim = 256;
  std::uint64_t adapter_seed = 123;
  int warmup_epochs = 5;
  double lr = 1e-4;
  int batch_size = 32;
  int proto_budget = 2048;
  std::uint64_t train_seed = 123;
  // memory and scoring
  double coreset_ratio = 0.3;
  int grid_cap = 16;
  int k = 3;
  std::string aggregate = "mean";  // mean | max | nearest
  double top_q = 0.03;
  // swag
  int swag_samples = 4;
  double swag_noise = 0.02;
  std::uint64_t swag_seed = 123;
  std::string swag_warmup = "identical";  // identical | last_two
  // rounds
  int rounds = 5;
  int budget = 200;
  std::string rank_mode = "boundary";  // boundary | uncert
  bool strict_normal_only = false;
  std::string resume_policy = "best_so_far";  // best_so_far | last
  std::string tau_policy = "reset";           // reset | persist
  double fine_tune_lr = 3e-5;
  std::uint64_t round_seed = 123;
  double metric_pool_fraction = 0.25;
  bool freeze_seed_memory = false;
  // execution and reporting
  std::string exec = "parallel";  // parallel | serial
  int heatmaps = 0;

  void Validate() const;
  PipelineOptions Pipeline() const;
  RoundConfig Rounds() const;
  FilterBankOptions Featurizer() const;
  ColorMode Color() const;
};

std::vector<std::string> ConfigKeys();

// Applies one `key = value` assignment.
void SetConfigValue(RunConfig& cfg, const std::string& key, const std::string& value);

// Applies every assignment in `text` on top of `cfg`.
void ApplyConfigText(RunConfig& cfg, const std::string& text);

std::string FormatConfig(const RunConfig& cfg);

RunConfig LoadConfigFile(const std::filesystem::path& path, RunConfig base = {});

}  // namespace incanom
