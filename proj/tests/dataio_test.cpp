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

#include <algorithm>
#include <fstream>
#include <set>

#include "incanom/dataio.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

std::string ToyCsv(int normals, int anomalies) {
  std::string s = "path,label\n";
  for (int i = 0; i < normals; ++i) s += "n" + std::to_string(i) + ".pgm,NORMAL\n";
  for (int i = 0; i < anomalies; ++i) s += "a" + std::to_string(i) + ".pgm,ANOMALY\n";
  return s;
}

TEST(Manifest, ParsesCsvWithDenseIds) {
  auto m = ParseManifest(ToyCsv(3, 2));
  ASSERT_EQ(m.size(), 5u);
  EXPECT_EQ(m.entries[4].id, 4);
  EXPECT_EQ(m.entries[0].label, 0);
  EXPECT_EQ(m.entries[3].label, 1);
  EXPECT_EQ(m.entries[0].split, Split::kTrain);
}

TEST(Manifest, ParsesJsonAndSplitColumn) {
  auto m = ParseManifest(R"([{"path":"a.pgm","label":0},{"path":"b.pgm","label":"ANOMALY","split":"test"}])");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.entries[1].label, 1);
  EXPECT_EQ(m.entries[1].split, Split::kTest);
  EXPECT_EQ(TestIds(m), std::vector<int>{1});
}

TEST(Manifest, CsvRoundTripsQuotedPaths) {
  Manifest m;
  m.entries.push_back({"dir/with,comma\"q.pgm", 1, 0, Split::kTest});
  m.entries.push_back({"plain.pgm", 0, 1, Split::kTrain});
  auto back = ParseManifest(FormatManifestCsv(m));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.entries[0].path, m.entries[0].path);
  EXPECT_EQ(back.entries[0].split, Split::kTest);
  EXPECT_EQ(back.entries[1].label, 0);
}

TEST(Manifest, RejectsBadInput) {
  EXPECT_THROW(ParseManifest(""), Error);
  EXPECT_THROW(ParseManifest("path,label\nx.pgm,MAYBE\n"), Error);
  EXPECT_THROW(ParseManifest("file,kind\nx.pgm,NORMAL\n"), Error);
  EXPECT_THROW(ParseManifest("path,label,split\nx.pgm,NORMAL,holdout\n"), Error);
  EXPECT_THROW(ParseManifest("{\"path\":1}"), Error);
}

TEST(Split, FifteenImageExample) {
  // 10 normals at 0.30 gives 3 seeds; the 5 anomalies all go to the pool.
  auto m = ParseManifest(ToyCsv(10, 5));
  auto s = SplitSeedPool(m, 0.30, 123);
  EXPECT_EQ(s.seed_ids.size(), 3u);
  EXPECT_EQ(s.pool_ids.size(), 12u);
  for (int id : s.seed_ids) EXPECT_EQ(m.label(id), 0);
}

TEST(Split, SingleNormalClampsToOneSeed) {
  auto m = ParseManifest(ToyCsv(1, 4));
  auto s = SplitSeedPool(m, 0.30, 1);
  EXPECT_EQ(s.seed_ids, std::vector<int>{0});
  EXPECT_EQ(s.pool_ids.size(), 4u);
}

TEST(Split, NoNormalsIsAnError) {
  auto m = ParseManifest(ToyCsv(0, 4));
  EXPECT_THROW(SplitSeedPool(m, 0.3, 1), Error);
  EXPECT_THROW(SplitSeedPool(ParseManifest(ToyCsv(2, 0)), 0.0, 1), Error);
}

TEST(Split, TestEntriesAreExcluded) {
  std::string csv = "path,label,split\n";
  for (int i = 0; i < 8; ++i) csv += "n" + std::to_string(i) + ",NORMAL," + (i < 2 ? "test" : "train") + "\n";
  auto m = ParseManifest(csv);
  auto s = SplitSeedPool(m, 0.5, 3);
  EXPECT_EQ(s.seed_ids.size() + s.pool_ids.size(), 6u);
  for (int id : s.seed_ids) EXPECT_GE(id, 2);
  for (int id : s.pool_ids) EXPECT_GE(id, 2);
}

TEST(Split, PartitionAndPurityProperties) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.Below(40));
    const int a = static_cast<int>(rng.Below(20));
    const double frac = 0.05 + 0.95 * rng.Uniform();
    auto m = ParseManifest(ToyCsv(n, a));
    auto s = SplitSeedPool(m, frac, rng.NextU64());
    std::set<int> all(s.seed_ids.begin(), s.seed_ids.end());
    for (int id : s.pool_ids) EXPECT_TRUE(all.insert(id).second);
    EXPECT_EQ(all.size(), static_cast<std::size_t>(n + a));
    for (int id : s.seed_ids) EXPECT_EQ(m.label(id), 0);
    EXPECT_GE(s.seed_ids.size(), 1u);
    EXPECT_TRUE(std::is_sorted(s.seed_ids.begin(), s.seed_ids.end()));
  }
}

TEST(Split, DeterministicForSeed) {
  auto m = ParseManifest(ToyCsv(30, 5));
  auto a = SplitSeedPool(m, 0.3, 9);
  auto b = SplitSeedPool(m, 0.3, 9);
  EXPECT_EQ(a.seed_ids, b.seed_ids);
  EXPECT_EQ(a.pool_ids, b.pool_ids);
}

TEST(Pnm, ParsesAsciiGray) {
  auto img = ParsePnm("P2\n# c\n2 2\n255\n0 255\n51 102\n", ColorMode::kGray);
  ASSERT_EQ(img.channels, 1);
  ASSERT_EQ(img.width, 2);
  EXPECT_FLOAT_EQ(img.data[1], 1.0f);
  EXPECT_FLOAT_EQ(img.data[2], 0.2f);
}

TEST(Pnm, BinaryColorToGrayAndRgb) {
  std::string ppm = "P6 1 1 255\n";
  ppm += static_cast<char>(255);
  ppm += static_cast<char>(0);
  ppm += static_cast<char>(0);
  auto rgb = ParsePnm(ppm, ColorMode::kRgb);
  ASSERT_EQ(rgb.channels, 3);
  EXPECT_FLOAT_EQ(rgb.data[0], 1.0f);
  EXPECT_FLOAT_EQ(rgb.data[1], 0.0f);
  auto gray = ParsePnm(ppm, ColorMode::kGray);
  ASSERT_EQ(gray.channels, 1);
  EXPECT_NEAR(gray.data[0], 0.299f, 1e-6);
}

TEST(Pnm, GrayToRgbReplicates) {
  auto img = ParsePnm("P2 1 1 10 5", ColorMode::kRgb);
  ASSERT_EQ(img.channels, 3);
  EXPECT_FLOAT_EQ(img.data[0], 0.5f);
  EXPECT_FLOAT_EQ(img.data[2], 0.5f);
}

TEST(Pnm, RejectsMalformed) {
  EXPECT_THROW(ParsePnm("GIF89a", ColorMode::kGray), Error);
  EXPECT_THROW(ParsePnm("P5 4 4 255\nab", ColorMode::kGray), Error);
  EXPECT_THROW(ParsePnm("P2 x 4 255", ColorMode::kGray), Error);
}

TEST(Image, ResizeSquareShape) {
  auto img = ParsePnm("P2 2 2 1 0 1 1 0", ColorMode::kGray);
  auto r = ResizeSquare(img, 8);
  EXPECT_EQ(r.height, 8);
  EXPECT_EQ(r.width, 8);
  EXPECT_EQ(r.data.size(), 64u);
  EXPECT_THROW(ResizeSquare(img, 0), Error);
}

TEST(Image, LoadResolvesRelativeManifestPaths) {
  auto dir = testutil::TempDir("dataio_load");
  std::ofstream(dir / "x.pgm") << "P2 1 1 4 2";
  std::ofstream(dir / "m.csv") << "path,label\nx.pgm,NORMAL\n";
  auto m = LoadManifest(dir / "m.csv");
  auto img = LoadImage(m.entries[0].path, ColorMode::kGray);
  EXPECT_FLOAT_EQ(img.data[0], 0.5f);
}

}  // namespace
}  // namespace incanom
