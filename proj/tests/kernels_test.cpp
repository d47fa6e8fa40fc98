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

#include "incanom/kernels.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

TEST(Kernels, KnnParallelMatchesSerial) {
  Rng rng(11);
  for (auto agg : {KnnAggregate::kMean, KnnAggregate::kMax, KnnAggregate::kNearest}) {
    auto q = testutil::RandomMatrix(rng, 50, 12, true);
    auto b = testutil::RandomMatrix(rng, 70, 12, true);
    auto norms = kernels::RowSquaredNorms(b.data.data(), b.rows, b.cols, Exec::kSerial);
    auto s = kernels::KnnScores(q.data.data(), q.rows, b.data.data(), b.rows, b.cols, norms, 3, agg, Exec::kSerial);
    auto p = kernels::KnnScores(q.data.data(), q.rows, b.data.data(), b.rows, b.cols, norms, 3, agg, Exec::kParallel);
    EXPECT_EQ(s, p);
  }
}

TEST(Kernels, KnnMatchesBruteForce) {
  Rng rng(12);
  auto q = testutil::RandomMatrix(rng, 20, 6);
  auto b = testutil::RandomMatrix(rng, 30, 6);
  auto norms = kernels::RowSquaredNorms(b.data.data(), b.rows, b.cols, Exec::kSerial);
  auto s = kernels::KnnScores(q.data.data(), q.rows, b.data.data(), b.rows, b.cols, norms, 2,
                              KnnAggregate::kMean, Exec::kSerial);
  std::vector<double> expect;
  oracle::ImageScore(q.data, q.rows, b, 2, 1.0, KnnAggregate::kMean, &expect);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], expect[i], 1e-6);
}

TEST(Kernels, MinDistanceUpdateAndArgmaxParallelMatchSerial) {
  Rng rng(13);
  auto pts = testutil::RandomMatrix(rng, 200, 5);
  std::vector<double> a(200, std::numeric_limits<double>::infinity()), b = a;
  a[0] = b[0] = -1.0;
  kernels::UpdateMinSquaredDistance(pts, 0, a, Exec::kSerial);
  kernels::UpdateMinSquaredDistance(pts, 0, b, Exec::kParallel);
  EXPECT_EQ(a, b);
  EXPECT_EQ(kernels::ArgMaxEligible(a, Exec::kSerial), kernels::ArgMaxEligible(b, Exec::kParallel));
}

TEST(Kernels, ArgmaxTiesGoToLowestIndex) {
  std::vector<double> v{-1.0, 2.0, 5.0, 5.0, 1.0, 5.0};
  EXPECT_EQ(kernels::ArgMaxEligible(v, Exec::kSerial), 2u);
  EXPECT_EQ(kernels::ArgMaxEligible(v, Exec::kParallel), 2u);
  std::vector<double> none{-1.0, -1.0};
  EXPECT_EQ(kernels::ArgMaxEligible(none, Exec::kSerial), none.size());
}

TEST(Kernels, LinearForwardParallelMatchesSerial) {
  Rng rng(14);
  const std::size_t in_dim = 7, loc = 33, out_dim = 9;
  std::vector<float> in(in_dim * loc);
  for (float& x : in) x = static_cast<float>(rng.Normal());
  std::vector<double> w(out_dim * in_dim), b(out_dim);
  for (double& x : w) x = rng.Normal();
  for (double& x : b) x = rng.Normal();
  std::vector<double> s(out_dim * loc), p(out_dim * loc);
  kernels::LinearForward(in.data(), in_dim, loc, w.data(), b.data(), out_dim, s.data(), Exec::kSerial);
  kernels::LinearForward(in.data(), in_dim, loc, w.data(), b.data(), out_dim, p.data(), Exec::kParallel);
  EXPECT_EQ(s, p);
  // location-major output: out[l * out_dim + o]
  double expect = b[2];
  for (std::size_t c = 0; c < in_dim; ++c) expect += w[2 * in_dim + c] * in[c * loc + 4];
  EXPECT_NEAR(s[4 * out_dim + 2], expect, 1e-12);
}

}  // namespace
}  // namespace incanom
