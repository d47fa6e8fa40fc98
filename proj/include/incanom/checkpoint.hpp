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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "incanom/adapter.hpp"
#include "incanom/memory.hpp"
#include "incanom/swag.hpp"

namespace incanom {

// Progress of the incremental round loop.
struct RoundState {
  std::vector<int> used;      // local pool indices already scored for selection, ascending
  std::vector<int> accepted;  // global ids, in admission order
  int round_index = 0;        // rounds completed
  double best_metric = -std::numeric_limits<double>::infinity();
  int best_round = 0;         // 0 = the pre-round state
  double tau = 1.0;           // carried across rounds only under the persist policy
  bool operator==(const RoundState&) const = default;
};

struct Checkpoint {
  AdapterParams adapter;
  AdamState optimizer;
  SwagState swag;
  RoundState state;
  std::string rng_state;
  std::optional<MemoryBank> memory;
};

inline constexpr char kCheckpointMagic[4] = {'C', 'G', 'C', 'K'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::string EncodeCheckpoint(const Checkpoint& ck);
Checkpoint DecodeCheckpoint(std::string bytes);
void WriteCheckpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

}  // namespace incanom
