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

#include "incanom/resize.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

TEST(Resize, SameSizeIsIdentity) {
  Rng rng(1);
  auto m = testutil::RandomMap(rng, 3, 5, 4);
  std::vector<float> out(m.size());
  ResizeBilinear(m.data.data(), 3, 5, 4, out.data(), 5, 4);
  EXPECT_EQ(out, m.data);
}

TEST(Resize, ConstantStaysConstant) {
  std::vector<double> in(2 * 3 * 3, 0.75);
  std::vector<double> out(2 * 8 * 8);
  ResizeBilinear(in.data(), 2, 3, 3, out.data(), 8, 8);
  for (double v : out) EXPECT_DOUBLE_EQ(v, 0.75);
}

TEST(Resize, AlignCornersFalseTaps) {
  // 2 -> 4: src = (dst + 0.5) * 0.5 - 0.5 = {-0.25 -> 0, 0.25, 0.75, 1.25}
  auto t = BilinearTaps<double>(2, 4);
  EXPECT_EQ(t.i0[0], 0);
  EXPECT_DOUBLE_EQ(t.w1[0], 0.0);
  EXPECT_DOUBLE_EQ(t.w1[1], 0.25);
  EXPECT_DOUBLE_EQ(t.w1[2], 0.75);
  EXPECT_EQ(t.i0[3], 1);
  EXPECT_EQ(t.i1[3], 1);
}

TEST(Resize, BackwardIsAdjoint) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 2, h = 1 + static_cast<int>(rng.Below(5)), w = 1 + static_cast<int>(rng.Below(5));
    const int oh = 1 + static_cast<int>(rng.Below(9)), ow = 1 + static_cast<int>(rng.Below(9));
    std::vector<double> x(static_cast<std::size_t>(c * h * w)), y(static_cast<std::size_t>(c * oh * ow));
    for (double& v : x) v = rng.Normal();
    for (double& v : y) v = rng.Normal();
    std::vector<double> rx(y.size()), rty(x.size(), 0.0);
    ResizeBilinear(x.data(), c, h, w, rx.data(), oh, ow);
    ResizeBilinearBackward(y.data(), c, h, w, oh, ow, rty.data());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += rx[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * rty[i];
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

}  // namespace
}  // namespace incanom
