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

#include "incanom/adapter.hpp"
#include "incanom/resize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

using testutil::Ptrs;
using testutil::RandomFeatures;

PrototypeSet RandomProtos(Rng& rng, std::size_t n, std::size_t dim) {
  PrototypeSet p;
  p.vectors = testutil::RandomMatrix(rng, n, dim, true);
  return p;
}

// Eval-mode forward written out directly from the definition.
std::vector<double> NaiveEmbed(const MultiScaleFeatures& f, const AdapterParams& p, int& gh, int& gw) {
  gh = 0;
  gw = 0;
  for (const auto& s : f.scales) {
    gh = std::max(gh, s.height);
    gw = std::max(gw, s.width);
  }
  const int d = p.out_dim;
  const int dim = p.embedding_dim();
  std::vector<double> z(static_cast<std::size_t>(gh * gw * dim));
  for (std::size_t s = 0; s < f.scales.size(); ++s) {
    const auto& fm = f.scales[s];
    const auto& sp = p.scales[s];
    const int locs = fm.height * fm.width;
    std::vector<double> chw(static_cast<std::size_t>(d * locs));
    for (int o = 0; o < d; ++o) {
      for (int l = 0; l < locs; ++l) {
        double a = sp.bias[o];
        for (int c = 0; c < fm.channels; ++c) a += sp.weight[o * fm.channels + c] * fm.data[c * locs + l];
        double y = sp.norm_scale[o] * (a - sp.running_mean[o]) / std::sqrt(sp.running_var[o] + p.norm_eps) +
                   sp.norm_shift[o];
        chw[o * locs + l] = std::max(0.0, y);
      }
    }
    std::vector<double> up(static_cast<std::size_t>(d * gh * gw));
    ResizeBilinear(chw.data(), d, fm.height, fm.width, up.data(), gh, gw);
    for (int pp = 0; pp < gh * gw; ++pp) {
      for (int o = 0; o < d; ++o) z[pp * dim + s * d + o] = up[o * gh * gw + pp];
    }
  }
  for (int pp = 0; pp < gh * gw; ++pp) {
    double n = 0.0;
    for (int c = 0; c < dim; ++c) n += z[pp * dim + c] * z[pp * dim + c];
    n = std::sqrt(n) + 1e-12;
    for (int c = 0; c < dim; ++c) z[pp * dim + c] /= n;
  }
  return z;
}

TEST(Adapter, EmbedShapesAndUnitRows) {
  Rng rng(1);
  const int ch[] = {3, 5};
  auto p = InitAdapter(ch, 4, 7);
  auto f = RandomFeatures(rng, {3, 5}, {6, 3});
  auto q = Embed(f, p);
  EXPECT_EQ(q.grid_h, 6);
  EXPECT_EQ(q.grid_w, 6);
  EXPECT_EQ(q.dim, 8);
  for (std::size_t i = 0; i < q.patch_count(); ++i) {
    double n = 0.0;
    for (float x : q.row(i)) n += static_cast<double>(x) * x;
    if (n > 0.0) EXPECT_NEAR(n, 1.0, 1e-5);
  }
}

TEST(Adapter, EmbedMatchesNaiveForward) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int ch[] = {2, 3};
    auto p = InitAdapter(ch, 3, rng.NextU64());
    std::vector<MultiScaleFeatures> imgs;
    for (int i = 0; i < 3; ++i) imgs.push_back(RandomFeatures(rng, {2, 3}, {4, 2}));
    auto ptrs = Ptrs(imgs);
    InitRunningStats(p, ptrs);
    for (auto& s : p.scales) {
      for (auto& v : s.norm_shift) v = 0.3 * rng.Normal();
    }
    int gh = 0, gw = 0;
    auto expect = NaiveEmbed(imgs[0], p, gh, gw);
    auto q = Embed(imgs[0], p);
    ASSERT_EQ(q.grid_h, gh);
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(q.vectors[i], expect[i], 1e-5);
  }
}

TEST(Adapter, FlattenAssignRoundTrip) {
  const int ch[] = {2, 3};
  auto p = InitAdapter(ch, 4, 1);
  EXPECT_EQ(TrainableCount(p), (4u * 2 + 12) + (4u * 3 + 12));
  auto theta = FlattenTrainable(p);
  for (double& t : theta) t += 1.0;
  auto q = p;
  AssignTrainable(q, theta);
  EXPECT_EQ(FlattenTrainable(q), theta);
  theta.pop_back();
  EXPECT_THROW(AssignTrainable(q, theta), Error);
}

TEST(Adapter, LossOfOrthogonalPatchIsSqrtTwo) {
  PatchEmbeddings q;
  q.grid_h = 1;
  q.grid_w = 1;
  q.dim = 2;
  q.vectors = {1.0f, 0.0f};
  PrototypeSet protos;
  protos.vectors = Matrix(1, 2);
  protos.vectors.data = {0.0f, 1.0f};
  EXPECT_NEAR(PrototypeLoss(q, protos), std::sqrt(2.0), 1e-12);
  protos.vectors.data = {1.0f, 0.0f};
  EXPECT_EQ(PrototypeLoss(q, protos), 0.0);
}

TEST(Adapter, PrototypeLossMatchesBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = testutil::RandomMatrix(rng, 9, 6, true);
    auto q = testutil::ToPatches(m, 3, 3);
    auto protos = RandomProtos(rng, 1 + rng.Below(7), 6);
    double expect = 0.0;
    for (std::size_t i = 0; i < 9; ++i) {
      double best = 1e300;
      for (std::size_t j = 0; j < protos.vectors.rows; ++j) {
        best = std::min(best, std::sqrt(oracle::SqDist(&m.data[i * 6], &protos.vectors.data[j * 6], 6)));
      }
      expect += best / 9.0;
    }
    EXPECT_NEAR(PrototypeLoss(q, protos), expect, 1e-9);
  }
}

TEST(Adapter, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int ch[] = {3, 2};
    auto p = InitAdapter(ch, 4, rng.NextU64());
    for (auto& s : p.scales) {
      for (auto& v : s.norm_shift) v = 0.5 + 0.2 * rng.Normal();
    }
    std::vector<MultiScaleFeatures> imgs;
    for (int i = 0; i < 2; ++i) imgs.push_back(RandomFeatures(rng, {3, 2}, {3, 2}));
    auto ptrs = Ptrs(imgs);
    auto protos = RandomProtos(rng, 5, 8);
    auto lg = ComputeLossGradient(ptrs, p, protos, Exec::kSerial);
    EXPECT_NEAR(lg.loss, TrainLoss(ptrs, p, protos), 1e-12);
    auto fd = oracle::FiniteDifferenceGradient(ptrs, p, protos);
    EXPECT_LT(oracle::RelativeError(lg.gradient, fd), 1e-4);
    auto par = ComputeLossGradient(ptrs, p, protos, Exec::kParallel);
    EXPECT_EQ(par.gradient, lg.gradient);
  }
}

TEST(Adapter, AdamWithZeroGradientLeavesParameters) {
  const int ch[] = {2};
  auto p = InitAdapter(ch, 3, 5);
  auto before = p;
  auto st = MakeAdam(p, 1e-3);
  std::vector<double> g(TrainableCount(p), 0.0);
  AdamStep(p, g, st);
  EXPECT_EQ(FlattenTrainable(p), FlattenTrainable(before));
  EXPECT_EQ(st.step, 1);
}

TEST(Adapter, AdamFirstStepMovesByLr) {
  const int ch[] = {1};
  auto p = InitAdapter(ch, 1, 5);
  auto theta = FlattenTrainable(p);
  auto st = MakeAdam(p, 0.01);
  std::vector<double> g{2.0, -3.0, 0.5, 1.0};
  AdamStep(p, g, st);
  auto after = FlattenTrainable(p);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(theta[i] - after[i], 0.01 * (g[i] > 0 ? 1.0 : -1.0), 1e-8);
  }
}

struct Fixture {
  std::vector<MultiScaleFeatures> imgs;
  AdapterParams params;
};

Fixture MakeFixture(std::uint64_t seed) {
  Rng rng(seed);
  Fixture fx;
  for (int i = 0; i < 12; ++i) fx.imgs.push_back(RandomFeatures(rng, {4, 6}, {4, 2}));
  const int ch[] = {4, 6};
  fx.params = InitAdapter(ch, 4, seed);
  InitRunningStats(fx.params, Ptrs(fx.imgs));
  return fx;
}

TEST(Adapter, ZeroEpochsIsANoOp) {
  auto fx = MakeFixture(6);
  WarmupOptions o;
  o.epochs = 0;
  auto r = Warmup(Ptrs(fx.imgs), fx.params, o);
  EXPECT_EQ(r.params, fx.params);
  EXPECT_TRUE(r.epoch_losses.empty());
  EXPECT_GE(r.prototypes.vectors.rows, 1u);
}

TEST(Adapter, TrainingDoesNotIncreaseLoss) {
  auto fx = MakeFixture(7);
  auto ptrs = Ptrs(fx.imgs);
  WarmupOptions o;
  o.epochs = 3;
  o.lr = 1e-3;
  o.batch_size = 4;
  o.proto_budget = 16;
  auto r = Warmup(ptrs, fx.params, o);
  ASSERT_EQ(r.epoch_losses.size(), 3u);
  EXPECT_LE(MeanPrototypeLoss(ptrs, r.params, r.prototypes),
            MeanPrototypeLoss(ptrs, fx.params, r.prototypes) + 1e-12);
}

TEST(Adapter, TrainingIsDeterministicAndExecIndependent) {
  auto fx = MakeFixture(8);
  auto ptrs = Ptrs(fx.imgs);
  WarmupOptions o;
  o.epochs = 2;
  o.batch_size = 5;
  o.proto_budget = 8;
  int hooks = 0;
  o.on_epoch = [&](int, const AdapterParams&) { ++hooks; };
  auto a = Warmup(ptrs, fx.params, o, Exec::kSerial);
  auto b = Warmup(ptrs, fx.params, o, Exec::kParallel);
  EXPECT_EQ(hooks, 4);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.optimizer, b.optimizer);
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
}

TEST(Adapter, ForwardTrainUpdatesRunningStats) {
  auto fx = MakeFixture(9);
  auto p = fx.params;
  auto out = ForwardTrain(Ptrs(fx.imgs), p);
  EXPECT_EQ(out.size(), fx.imgs.size());
  EXPECT_NE(p.scales[0].running_mean, fx.params.scales[0].running_mean);
  EXPECT_EQ(FlattenTrainable(p), FlattenTrainable(fx.params));
}

TEST(Adapter, RejectsBadInputs) {
  const int none[] = {0};
  EXPECT_THROW(InitAdapter(none, 4, 1), Error);
  const int ch[] = {2};
  EXPECT_THROW(InitAdapter(ch, 0, 1), Error);
  auto p = InitAdapter(ch, 2, 1);
  Rng rng(1);
  auto f = RandomFeatures(rng, {3}, {2});
  EXPECT_THROW(Embed(f, p), Error);
  PrototypeSet empty;
  auto g = RandomFeatures(rng, {2}, {2});
  const MultiScaleFeatures* one[] = {&g};
  EXPECT_THROW(TrainLoss(one, p, empty), Error);
}

}  // namespace
}  // namespace incanom
