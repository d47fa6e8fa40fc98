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
#include <string>
#include <vector>

#include "incanom/common.hpp"

namespace incanom {

enum class Split { kTrain, kTest };

struct ManifestEntry {
  std::string path;
  int label = 0;  // 0 normal, 1 anomaly
  int id = 0;
  Split split = Split::kTrain;
};

// Ids are dense 0..N-1 in file order.
struct Manifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  int label(int id) const { return entries.at(static_cast<std::size_t>(id)).label; }
};

// CSV with header `path,label[,split]` or a JSON array of
// {"path": ..., "label": "NORMAL"|"ANOMALY"|0|1, "split": "train"|"test"}.
// The format is chosen by the first non-blank character.
Manifest ParseManifest(const std::string& text);
Manifest LoadManifest(const std::filesystem::path& path);
std::string FormatManifestCsv(const Manifest& m);
void ValidateManifest(const Manifest& m);

struct SplitResult {
  std::vector<int> seed_ids;  // normals only
  std::vector<int> pool_ids;  // remaining normals and all anomalies
  double seed_fraction = 0.30;
  std::uint64_t rng_seed = 0;
};

// Seeded Fisher-Yates over the train-split normals; the first
// max(1, round_half_up(fraction * |normals|)) become the seed. Both lists are
// returned sorted by id. Test-split entries are never part of either list.
SplitResult SplitSeedPool(const Manifest& manifest, double seed_fraction, std::uint64_t rng_seed);

std::vector<int> TestIds(const Manifest& manifest);

enum class ColorMode { kGray, kRgb };

// Planar CHW image with values in [0, 1].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
};

// Binary or ASCII netpbm (P2/P3/P5/P6). Other formats are rejected.
Image LoadImage(const std::filesystem::path& path, ColorMode mode);
Image ParsePnm(const std::string& bytes, ColorMode mode);

// Bilinear (align_corners = false) resize to size x size.
Image ResizeSquare(const Image& img, int size);

}  // namespace incanom
