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
#include <filesystem>
#include <map>
#include <string>

#include "incanom/common.hpp"

namespace incanom {

// Embedding interchange file, all integers and floats little-endian:
//   "CGEM"  u16 version (=1)  u32 record_count
//   per record: u32 id, u32 scale_count, scale_count x (u32 C, u32 H, u32 W),
//               then each scale's C*H*W float32 payload (CHW order)
using EmbeddingSet = std::map<int, MultiScaleFeatures>;

inline constexpr char kEmbeddingMagic[4] = {'C', 'G', 'E', 'M'};
inline constexpr std::uint16_t kEmbeddingVersion = 1;

std::string EncodeEmbeddings(const EmbeddingSet& set);
EmbeddingSet DecodeEmbeddings(std::string bytes);

void WriteEmbeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet ReadEmbeddings(const std::filesystem::path& path);

}  // namespace incanom
