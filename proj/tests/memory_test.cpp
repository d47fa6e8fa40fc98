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

#include <numeric>

#include "incanom/memory.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

Matrix Points(std::initializer_list<std::initializer_list<float>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (auto r : rows) {
    std::copy(r.begin(), r.end(), m.row(i++).begin());
  }
  return m;
}

TEST(Coreset, FullRatioKeepsEverythingInSelectionOrder) {
  auto m = Points({{0, 0}, {1, 0}, {10, 0}, {5, 0}});
  auto picks = CoresetGreedy(m, 1.0);
  EXPECT_EQ(picks, (std::vector<std::size_t>{0, 2, 3, 1}));
}

TEST(Coreset, PicksFarthestSecond) {
  auto m = Points({{0, 0}, {10, 0}, {0, 1}});
  // ceil(0.66 * 3) = 2
  EXPECT_EQ(CoresetGreedy(m, 0.66), (std::vector<std::size_t>{0, 1}));
}

TEST(Coreset, TiesGoToLowestIndex) {
  auto m = Points({{0, 0}, {1, 0}, {-1, 0}, {0, 1}});
  EXPECT_EQ(CoresetGreedy(m, 0.5), (std::vector<std::size_t>{0, 1}));
}

TEST(Coreset, RejectsInvalidRatio) {
  auto m = Points({{0, 0}});
  EXPECT_THROW(CoresetGreedy(m, 0.0), Error);
  EXPECT_THROW(CoresetGreedy(m, 1.5), Error);
  EXPECT_THROW(CoresetGreedy(Matrix(0, 2), 0.5), Error);
  EXPECT_EQ(CoresetGreedy(m, 0.01).size(), 1u);
}

TEST(Coreset, MatchesBruteForceOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.Below(64), dim = 1 + rng.Below(8);
    auto m = testutil::RandomMatrix(rng, n, dim, rng.Below(2) == 1);
    const double ratio = 0.01 + 0.99 * rng.Uniform();
    auto picks = CoresetGreedy(m, ratio, 0, trial % 2 ? Exec::kParallel : Exec::kSerial);
    EXPECT_EQ(picks, oracle::Coreset(m, FractionCount(ratio, n), 0));
  }
}

TEST(Coreset, CoveringRadiusNonIncreasing) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = testutil::RandomMatrix(rng, 40, 4);
    auto full = CoresetGreedy(m, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= full.size(); ++k) {
      std::span<const std::size_t> sel(full.data(), k);
      double r = CoveringRadius(m, sel);
      EXPECT_LE(r, prev);
      prev = r;
    }
    EXPECT_EQ(prev, 0.0);
  }
}

TEST(Memory, SixteenGridAtDefaultRatioKeeps77) {
  Rng rng(23);
  auto q = testutil::ToPatches(testutil::RandomMatrix(rng, 256, 8, true), 16, 16);
  const int id = 4;
  auto bank = BuildMemory(std::span(&q, 1), std::span(&id, 1), {});
  EXPECT_EQ(bank.size(), 77u);
  EXPECT_EQ(bank.dim(), 8u);
  for (int s : bank.source_ids) EXPECT_EQ(s, 4);
}

TEST(Memory, RebuildIsDeterministicAndCountsMatch) {
  Rng rng(24);
  std::vector<PatchEmbeddings> imgs;
  for (int i = 0; i < 3; ++i) imgs.push_back(testutil::ToPatches(testutil::RandomMatrix(rng, 16, 5, true), 4, 4));
  std::vector<int> ids{0, 1, 2};
  auto a = BuildMemory(std::span(imgs).first(1), std::span(ids).first(1), {});
  auto b = BuildMemory(std::span(imgs).first(1), std::span(ids).first(1), {});
  EXPECT_EQ(a.vectors.data, b.vectors.data);
  EXPECT_EQ(a.source_ids, b.source_ids);
  auto grown = BuildMemory(imgs, ids, {}, MemorySource::kSeedAndAccepted);
  EXPECT_EQ(grown.size(), FractionCount(0.3, 48));
  EXPECT_EQ(grown.built_from, MemorySource::kSeedAndAccepted);
}

TEST(Memory, CapGridShrinksLargeGridsOnly) {
  Rng rng(25);
  auto big = testutil::ToPatches(testutil::RandomMatrix(rng, 20 * 24, 3, true), 20, 24);
  auto c = CapGrid(big, 16);
  EXPECT_EQ(c.grid_h, 16);
  EXPECT_EQ(c.grid_w, 16);
  for (std::size_t i = 0; i < c.patch_count(); ++i) {
    double n = 0.0;
    for (float x : c.row(i)) n += static_cast<double>(x) * x;
    EXPECT_NEAR(n, 1.0, 1e-5);
  }
  auto small = testutil::ToPatches(testutil::RandomMatrix(rng, 12, 3, true), 3, 4);
  EXPECT_EQ(CapGrid(small, 16).vectors, small.vectors);
  EXPECT_THROW(CapGrid(small, 0), Error);
}

TEST(Memory, RejectsEmptyOrMismatched) {
  std::vector<PatchEmbeddings> none;
  std::vector<int> ids;
  EXPECT_THROW(BuildMemory(none, ids, {}), Error);
  Rng rng(26);
  std::vector<PatchEmbeddings> one{testutil::ToPatches(testutil::RandomMatrix(rng, 4, 2), 2, 2)};
  EXPECT_THROW(BuildMemory(one, ids, {}), Error);
}

}  // namespace
}  // namespace incanom
