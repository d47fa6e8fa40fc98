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

#include <fstream>

#include "incanom/config.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.Pipeline().score.k, 3);
  EXPECT_DOUBLE_EQ(c.Pipeline().score.top_q, 0.03);
  EXPECT_EQ(c.Rounds().budget, 200);
  EXPECT_EQ(c.Rounds().rounds, 5);
  EXPECT_DOUBLE_EQ(c.Pipeline().memory.coreset_ratio, 0.3);
  EXPECT_EQ(c.Pipeline().swag_samples, 4);
  EXPECT_DOUBLE_EQ(c.Pipeline().swag_noise, 0.02);
  EXPECT_DOUBLE_EQ(c.Pipeline().warmup.lr, 1e-4);
  EXPECT_EQ(c.Pipeline().warmup.batch_size, 32);
}

TEST(Config, FormatParseRoundTrip) {
  RunConfig c;
  SetConfigValue(c, "lr", "0.000123456789");
  SetConfigValue(c, "rank_mode", "uncert");
  SetConfigValue(c, "strict_normal_only", "true");
  SetConfigValue(c, "budget", "17");
  SetConfigValue(c, "round_seed", "18446744073709551615");
  RunConfig back;
  ApplyConfigText(back, FormatConfig(c));
  EXPECT_EQ(FormatConfig(back), FormatConfig(c));
  EXPECT_EQ(back.lr, c.lr);
  EXPECT_EQ(back.round_seed, c.round_seed);
  EXPECT_TRUE(back.strict_normal_only);
  EXPECT_EQ(ConfigKeys().size(), 35u);
}

TEST(Config, CommentsAndBlankLines) {
  RunConfig c;
  ApplyConfigText(c, "# header\n\n  k = 5  \nbudget=9 # trailing\n");
  EXPECT_EQ(c.k, 5);
  EXPECT_EQ(c.budget, 9);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  RunConfig c;
  EXPECT_THROW(SetConfigValue(c, "learning_rate", "1"), Error);
  EXPECT_THROW(SetConfigValue(c, "k", "three"), Error);
  EXPECT_THROW(SetConfigValue(c, "strict_normal_only", "maybe"), Error);
  EXPECT_THROW(ApplyConfigText(c, "no equals sign\n"), Error);
  for (auto [key, value] : std::vector<std::pair<std::string, std::string>>{
           {"seed_fraction", "0"}, {"coreset_ratio", "1.5"}, {"top_q", "0"}, {"rank_mode", "fusion"},
           {"budget", "0"}, {"aggregate", "median"}, {"image_size", "16"}, {"swag_samples", "0"}}) {
    RunConfig d;
    SetConfigValue(d, key, value);
    try {
      d.Validate();
      ADD_FAILURE() << key;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    }
  }
}

TEST(Config, LoadFileLayersOverBase) {
  auto dir = testutil::TempDir("config");
  std::ofstream(dir / "c.txt") << "k = 1\n";
  RunConfig base;
  base.budget = 3;
  auto c = LoadConfigFile(dir / "c.txt", base);
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.budget, 3);
}

}  // namespace
}  // namespace incanom
