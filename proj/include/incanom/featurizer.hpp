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
#include <vector>

#include "incanom/common.hpp"
#include "incanom/dataio.hpp"
#include "incanom/kernels.hpp"

namespace incanom {

// Fixed random convolution stage standing in for a frozen backbone.
struct ConvStage {
  int out_channels = 0;
  int in_channels = 0;
  int kernel = 0;
  int stride = 0;
  std::vector<float> weights;  // out x in x kernel x kernel
};

// Two stages: stride 4 and stride 8, each followed by ReLU and 2x2 average
// pooling, giving feature grids of H/8 and H/16.
struct FilterBank {
  std::vector<ConvStage> stages;
};

struct FilterBankOptions {
  int in_channels = 1;
  int channels_fine = 32;
  int channels_coarse = 64;
  int kernel_fine = 8;
  int kernel_coarse = 16;
  std::uint64_t rng_seed = 7;
};

FilterBank MakeFilterBank(const FilterBankOptions& opts);

inline constexpr int kMinFeaturizeSize = 32;

MultiScaleFeatures FeaturizeBuiltin(const Image& image, const FilterBank& bank,
                                    Exec exec = Exec::kParallel);

}  // namespace incanom
