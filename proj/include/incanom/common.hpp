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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace incanom {

// Error categories map onto distinct CLI exit codes.
enum class ErrorKind { kConfig, kData, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ConfigError(const std::string& what) { return Error(ErrorKind::kConfig, what); }
inline Error DataError(const std::string& what) { return Error(ErrorKind::kData, what); }
inline Error NumericError(const std::string& what) { return Error(ErrorKind::kNumeric, what); }

// max(1, ceil(ratio * n)), with a small guard so 0.3 * 10 yields 3 and not 4.
std::size_t FractionCount(double ratio, std::size_t n);

// Round half up, the ⌊x⌉ used when sizing the seed split.
std::size_t RoundHalfUp(double x);

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive per-item seeds
// so results do not depend on evaluation order.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Seeded generator with portable transforms. The standard distributions are
// implementation-defined, so uniform/normal/below are computed here from raw
// mt19937_64 output to keep runs bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  double Uniform();          // [0, 1), 53-bit resolution
  double Normal();           // Box-Muller
  std::size_t Below(std::size_t n);  // uniform in [0, n), rejection sampled

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = Below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string SaveState() const;
  void LoadState(const std::string& state);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Dense row-major float matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// One backbone scale: channels x height x width, row-major (CHW).
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  bool operator==(const FeatureMap&) const = default;
};

struct MultiScaleFeatures {
  std::vector<FeatureMap> scales;
  bool operator==(const MultiScaleFeatures&) const = default;
};

// Per-location unit vectors; row p = location (p / grid_w, p % grid_w).
struct PatchEmbeddings {
  int grid_h = 0;
  int grid_w = 0;
  int dim = 0;
  std::vector<float> vectors;

  std::size_t patch_count() const {
    return static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w);
  }
  std::span<const float> row(std::size_t p) const {
    return {vectors.data() + p * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

void ValidateFeatures(const MultiScaleFeatures& f);

}  // namespace incanom
