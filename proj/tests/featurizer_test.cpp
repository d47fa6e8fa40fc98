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

#include <gtest/gtest.h>

#include <cmath>

#include "incanom/featurizer.hpp"

namespace incanom {
namespace {

Image Noise(int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img;
  img.channels = c;
  img.height = h;
  img.width = w;
  img.data.resize(static_cast<std::size_t>(c) * h * w);
  for (float& v : img.data) v = static_cast<float>(rng.Uniform());
  return img;
}

TEST(Featurizer, TwoScalesWithExpectedGrids) {
  FilterBankOptions o;
  o.channels_fine = 4;
  o.channels_coarse = 6;
  auto bank = MakeFilterBank(o);
  auto f = FeaturizeBuiltin(Noise(1, 64, 64, 1), bank);
  ASSERT_EQ(f.scales.size(), 2u);
  EXPECT_EQ(f.scales[0].channels, 4);
  EXPECT_EQ(f.scales[0].height, 8);
  EXPECT_EQ(f.scales[0].width, 8);
  EXPECT_EQ(f.scales[1].channels, 6);
  EXPECT_EQ(f.scales[1].height, 4);
  EXPECT_NO_THROW(ValidateFeatures(f));
}

TEST(Featurizer, ZeroImageGivesZeroFeatures) {
  auto bank = MakeFilterBank({});
  Image img = Noise(1, 32, 32, 2);
  std::fill(img.data.begin(), img.data.end(), 0.0f);
  auto f = FeaturizeBuiltin(img, bank);
  for (const auto& s : f.scales) {
    for (float v : s.data) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Featurizer, DeterministicAndParallelMatchesSerial) {
  FilterBankOptions o;
  o.in_channels = 3;
  auto a = FeaturizeBuiltin(Noise(3, 48, 40, 3), MakeFilterBank(o), Exec::kSerial);
  auto b = FeaturizeBuiltin(Noise(3, 48, 40, 3), MakeFilterBank(o), Exec::kParallel);
  EXPECT_EQ(a, b);
  o.rng_seed = 8;
  auto c = FeaturizeBuiltin(Noise(3, 48, 40, 3), MakeFilterBank(o));
  EXPECT_NE(a, c);
}

TEST(Featurizer, FeaturesAreNonNegative) {
  auto f = FeaturizeBuiltin(Noise(1, 64, 64, 4), MakeFilterBank({}));
  for (const auto& s : f.scales) {
    for (float v : s.data) EXPECT_GE(v, 0.0f);
  }
}

TEST(Featurizer, RejectsSmallOrInvalidInput) {
  auto bank = MakeFilterBank({});
  EXPECT_THROW(FeaturizeBuiltin(Noise(1, 31, 64, 5), bank), Error);
  Image bad = Noise(1, 32, 32, 6);
  bad.data[7] = std::nanf("");
  EXPECT_THROW(FeaturizeBuiltin(bad, bank), Error);
  EXPECT_THROW(FeaturizeBuiltin(Noise(3, 32, 32, 7), bank), Error);
  FilterBankOptions o;
  o.channels_fine = 0;
  EXPECT_THROW(MakeFilterBank(o), Error);
}

}  // namespace
}  // namespace incanom
