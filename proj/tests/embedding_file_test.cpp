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

#include "incanom/binary_io.hpp"
#include "incanom/embedding_file.hpp"
#include "test_util.hpp"

namespace incanom {
namespace {

EmbeddingSet RandomSet(Rng& rng, int n) {
  EmbeddingSet set;
  for (int i = 0; i < n; ++i) {
    const int scales = 1 + static_cast<int>(rng.Below(3));
    MultiScaleFeatures f;
    for (int s = 0; s < scales; ++s) {
      f.scales.push_back(testutil::RandomMap(rng, 1 + static_cast<int>(rng.Below(5)),
                                             1 + static_cast<int>(rng.Below(6)),
                                             1 + static_cast<int>(rng.Below(6))));
    }
    set.emplace(static_cast<int>(rng.Below(1000)) * 3 + i % 3, std::move(f));
  }
  return set;
}

FormatFault FaultOf(const std::string& bytes) {
  try {
    DecodeEmbeddings(bytes);
  } catch (const FormatError& e) {
    return e.fault();
  }
  ADD_FAILURE() << "decode succeeded";
  return FormatFault::kCorrupt;
}

TEST(EmbeddingFile, RoundTripsThroughDisk) {
  Rng rng(1);
  auto set = RandomSet(rng, 6);
  auto dir = testutil::TempDir("emb_rt");
  WriteEmbeddings(set, dir / "e.bin");
  EXPECT_EQ(ReadEmbeddings(dir / "e.bin"), set);
}

TEST(EmbeddingFile, EmptySetRoundTrips) {
  auto bytes = EncodeEmbeddings({});
  EXPECT_EQ(bytes.size(), 10u);
  EXPECT_TRUE(DecodeEmbeddings(bytes).empty());
}

TEST(EmbeddingFile, HeaderLayout) {
  EmbeddingSet set;
  MultiScaleFeatures f;
  f.scales.push_back({1, 1, 2, {1.0f, -2.0f}});
  set.emplace(5, f);
  auto b = EncodeEmbeddings(set);
  EXPECT_EQ(b.substr(0, 4), "CGEM");
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(b[5]), 0u);
  // header 10 + id 4 + nscales 4 + shape 12 + payload 8
  EXPECT_EQ(b.size(), 38u);
}

TEST(EmbeddingFile, DistinctFaults) {
  Rng rng(2);
  auto good = EncodeEmbeddings(RandomSet(rng, 2));
  std::string magic = good;
  magic[0] = 'X';
  EXPECT_EQ(FaultOf(magic), FormatFault::kBadMagic);
  std::string version = good;
  version[4] = 2;
  EXPECT_EQ(FaultOf(version), FormatFault::kVersionMismatch);
  EXPECT_EQ(FaultOf(good.substr(0, good.size() - 3)), FormatFault::kTruncated);
  EXPECT_EQ(FaultOf(good.substr(0, 2)), FormatFault::kTruncated);
  EXPECT_EQ(FaultOf(good + "xx"), FormatFault::kCorrupt);
  std::string zero_scales = EncodeEmbeddings({});
  zero_scales[6] = 1;
  zero_scales += std::string(8, '\0');
  EXPECT_EQ(FaultOf(zero_scales), FormatFault::kCorrupt);
}

TEST(EmbeddingFile, EncodeDecodeIsFixedPointOnRandomShapes) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto set = RandomSet(rng, static_cast<int>(rng.Below(5)));
    auto bytes = EncodeEmbeddings(set);
    auto back = DecodeEmbeddings(bytes);
    EXPECT_EQ(back, set);
    EXPECT_EQ(EncodeEmbeddings(back), bytes);
  }
}

TEST(EmbeddingFile, RejectsMismatchedPayloadOnEncode) {
  EmbeddingSet set;
  MultiScaleFeatures f;
  f.scales.push_back({2, 2, 2, {1.0f}});
  set.emplace(0, f);
  EXPECT_THROW(EncodeEmbeddings(set), Error);
}

}  // namespace
}  // namespace incanom
