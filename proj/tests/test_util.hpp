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

// Random instance builders shared by the tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incanom/adapter.hpp"
#include "incanom/common.hpp"

namespace testutil {

inline incanom::FeatureMap RandomMap(incanom::Rng& rng, int c, int h, int w, double scale = 1.0) {
  incanom::FeatureMap f;
  f.channels = c;
  f.height = h;
  f.width = w;
  f.data.resize(f.size());
  for (float& x : f.data) x = static_cast<float>(scale * rng.Normal());
  return f;
}

inline incanom::MultiScaleFeatures RandomFeatures(incanom::Rng& rng, const std::vector<int>& channels,
                                                  const std::vector<int>& sides) {
  incanom::MultiScaleFeatures m;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    m.scales.push_back(RandomMap(rng, channels[i], sides[i], sides[i]));
  }
  return m;
}

inline incanom::Matrix RandomMatrix(incanom::Rng& rng, std::size_t rows, std::size_t cols,
                                    bool unit = false) {
  incanom::Matrix m(rows, cols);
  for (float& x : m.data) x = static_cast<float>(rng.Normal());
  if (unit) {
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = m.row(r);
      double n = 0.0;
      for (float x : row) n += static_cast<double>(x) * x;
      n = std::sqrt(n) + 1e-12;
      for (float& x : row) x = static_cast<float>(x / n);
    }
  }
  return m;
}

inline incanom::PatchEmbeddings ToPatches(const incanom::Matrix& m, int gh, int gw) {
  incanom::PatchEmbeddings q;
  q.grid_h = gh;
  q.grid_w = gw;
  q.dim = static_cast<int>(m.cols);
  q.vectors = m.data;
  return q;
}

inline std::vector<const incanom::MultiScaleFeatures*> Ptrs(
    const std::vector<incanom::MultiScaleFeatures>& v) {
  std::vector<const incanom::MultiScaleFeatures*> out;
  for (const auto& f : v) out.push_back(&f);
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("incanom_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testutil
