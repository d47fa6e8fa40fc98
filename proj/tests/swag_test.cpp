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

#include "incanom/swag.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

AdapterParams Small(std::uint64_t seed) {
  const int ch[] = {2, 3};
  return InitAdapter(ch, 3, seed);
}

TEST(Swag, FirstSnapshotHasZeroVariance) {
  SwagState st;
  auto p = Small(1);
  SwagSnapshot(st, p);
  EXPECT_EQ(st.snapshot_count, 1);
  EXPECT_EQ(st.mean, FlattenTrainable(p));
  for (double v : SwagVariance(st)) EXPECT_EQ(v, 0.0);
}

TEST(Swag, OppositeSnapshotsGiveSquaredVariance) {
  SwagState st;
  auto p = Small(2);
  auto theta = FlattenTrainable(p);
  SwagSnapshot(st, p);
  auto neg = theta;
  for (double& x : neg) x = -x;
  auto q = p;
  AssignTrainable(q, neg);
  SwagSnapshot(st, q);
  auto var = SwagVariance(st);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    EXPECT_NEAR(st.mean[i], 0.0, 1e-15);
    EXPECT_NEAR(var[i], theta[i] * theta[i], 1e-12);
  }
}

TEST(Swag, IdenticalSnapshotsGiveZeroVariance) {
  SwagState st;
  auto p = Small(3);
  for (int i = 0; i < 5; ++i) SwagSnapshot(st, p);
  for (double v : SwagVariance(st)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Swag, ZeroVarianceSampleIsMeanExactly) {
  SwagState st;
  auto p = Small(4);
  SwagSnapshot(st, p);
  auto s = SampleAdapter(st, p, 99, 0.02);
  EXPECT_EQ(FlattenTrainable(s), st.mean);
}

TEST(Swag, ZeroNoiseScaleReturnsMean) {
  SwagState st;
  SwagSnapshot(st, Small(5));
  SwagSnapshot(st, Small(6));
  auto s = SampleAdapter(st, Small(5), 7, 0.0);
  EXPECT_EQ(FlattenTrainable(s), st.mean);
}

TEST(Swag, SamplingIsDeterministic) {
  SwagState st;
  SwagSnapshot(st, Small(5));
  SwagSnapshot(st, Small(6));
  EXPECT_EQ(SampleAdapter(st, Small(5), 7, 0.5), SampleAdapter(st, Small(5), 7, 0.5));
  EXPECT_NE(SampleAdapter(st, Small(5), 7, 0.5), SampleAdapter(st, Small(5), 8, 0.5));
}

TEST(Swag, MonteCarloStdMatchesScale) {
  // One scalar weight with variance 4: samples have std s * 2.
  const int ch[] = {1};
  auto p = InitAdapter(ch, 1, 1);
  SwagState st;
  auto theta = FlattenTrainable(p);
  theta[0] = 3.0;
  AssignTrainable(p, theta);
  SwagSnapshot(st, p);
  theta[0] = -1.0;
  AssignTrainable(p, theta);
  SwagSnapshot(st, p);
  ASSERT_NEAR(SwagVariance(st)[0], 4.0, 1e-12);
  const double s = 0.02;
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    double w = FlattenTrainable(SampleAdapter(st, p, MixSeed(11, static_cast<std::uint64_t>(i)), s))[0];
    sum += w;
    sq += w * w;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd / (s * 2.0), 1.0, 0.03);
  EXPECT_NEAR(mean, 1.0, 0.01);
}

TEST(Swag, RunningMomentsMatchBatchRecompute) {
  Rng rng(12);
  SwagState st;
  std::vector<std::vector<double>> kept;
  auto p = Small(7);
  for (int k = 0; k < 9; ++k) {
    auto theta = FlattenTrainable(p);
    for (double& x : theta) x += rng.Normal();
    AssignTrainable(p, theta);
    SwagSnapshot(st, p);
    kept.push_back(theta);
  }
  const std::size_t n = kept.front().size();
  auto var = SwagVariance(st);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0, m2 = 0.0;
    for (const auto& t : kept) {
      m += t[i];
      m2 += t[i] * t[i];
    }
    m /= kept.size();
    m2 /= kept.size();
    EXPECT_NEAR(st.mean[i], m, 1e-6);
    EXPECT_NEAR(var[i], std::max(0.0, m2 - m * m), 1e-6);
    EXPECT_GE(st.sq_mean[i], st.mean[i] * st.mean[i] - 1e-7);
  }
}

TEST(Swag, PopulationVarianceOfTwo) {
  std::vector<double> v{1.0, 4.0};
  EXPECT_DOUBLE_EQ(PopulationVariance(v), 2.25);
}

struct ScoringFixture {
  std::vector<MultiScaleFeatures> imgs;
  AdapterParams params;
  MemoryBank bank;
};

ScoringFixture MakeScoring(std::uint64_t seed) {
  Rng rng(seed);
  ScoringFixture fx;
  for (int i = 0; i < 4; ++i) fx.imgs.push_back(testutil::RandomFeatures(rng, {2, 3}, {4, 2}));
  fx.params = Small(seed);
  InitRunningStats(fx.params, testutil::Ptrs(fx.imgs));
  std::vector<PatchEmbeddings> q;
  std::vector<int> ids;
  for (int i = 0; i < 3; ++i) {
    q.push_back(Embed(fx.imgs[static_cast<std::size_t>(i)], fx.params));
    ids.push_back(i);
  }
  fx.bank = BuildMemory(q, ids, {0.5, 16, 0});
  return fx;
}

TEST(Uncertainty, DegeneratePosteriorGivesZero) {
  auto fx = MakeScoring(13);
  SwagState st;
  SwagSnapshot(st, fx.params);
  SwagSnapshot(st, fx.params);
  BankIndex idx(fx.bank);
  for (int i = 0; i < 4; ++i) {
    auto u = EstimateUncertainty(fx.imgs[static_cast<std::size_t>(i)], i, st, fx.params, idx, {});
    EXPECT_EQ(u.value, 0.0);
    EXPECT_EQ(u.sample_scores.size(), 4u);
  }
}

TEST(Uncertainty, MatchesRecomputationFromStoredScores) {
  auto fx = MakeScoring(14);
  SwagState st;
  SwagSnapshot(st, fx.params);
  auto moved = fx.params;
  auto theta = FlattenTrainable(moved);
  Rng rng(15);
  for (double& x : theta) x += 0.3 * rng.Normal();
  AssignTrainable(moved, theta);
  SwagSnapshot(st, moved);
  BankIndex idx(fx.bank);
  UncertaintyOptions o;
  o.samples = 2;
  o.noise_scale = 1.0;
  auto u = EstimateUncertainty(fx.imgs[3], 3, st, fx.params, idx, o);
  ASSERT_EQ(u.sample_scores.size(), 2u);
  const double a = u.sample_scores[0], b = u.sample_scores[1], m = (a + b) / 2.0;
  EXPECT_NEAR(u.value, ((a - m) * (a - m) + (b - m) * (b - m)) / 2.0, 1e-9);
  EXPECT_GT(u.value, 0.0);
  // each sample reproduces from its derived seed
  auto s0 = SampleAdapter(st, fx.params, MixSeed(o.global_seed, 3, 0), o.noise_scale);
  EXPECT_EQ(ScoreImage(Embed(fx.imgs[3], s0), idx, o.score).image_score, a);
  o.samples = 0;
  EXPECT_THROW(EstimateUncertainty(fx.imgs[3], 3, st, fx.params, idx, o), Error);
}

TEST(Swag, ZeroSnapshotsCannotSample) {
  SwagState st;
  EXPECT_THROW(SampleAdapter(st, Small(1), 1, 0.02), Error);
  auto p = Small(1);
  auto theta = FlattenTrainable(p);
  theta[0] = std::nan("");
  AssignTrainable(p, theta);
  EXPECT_THROW(SwagSnapshot(st, p), Error);
}

}  // namespace
}  // namespace incanom
