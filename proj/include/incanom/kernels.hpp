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

// Data-parallel inner loops. Every kernel has a serial reference path that the
// tests compare against, and the OpenMP path must reproduce it bit-exactly
// regardless of thread count (no order-dependent reductions).

#include <cstddef>
#include <span>
#include <vector>

#include "incanom/common.hpp"

namespace incanom {

enum class Exec { kSerial, kParallel };

enum class KnnAggregate { kMean, kMax, kNearest };

namespace kernels {

double SquaredDistance(std::span<const float> a, std::span<const float> b);
double Dot(std::span<const float> a, std::span<const float> b);

// Squared norms of every row, accumulated in double.
std::vector<double> RowSquaredNorms(const float* rows, std::size_t n, std::size_t dim, Exec exec);

// Per-row k-NN score against `bank`: the k smallest Euclidean distances,
// aggregated per `agg`. Distances use |a|^2 + |b|^2 - 2<a,b>, which reduces
// to sqrt(2 - 2<a,b>) on unit rows.
std::vector<double> KnnScores(const float* queries, std::size_t n_queries, const float* bank,
                              std::size_t n_bank, std::size_t dim,
                              std::span<const double> bank_sq_norms, int k, KnnAggregate agg,
                              Exec exec);

// min_sq[i] = min(min_sq[i], |x_i - x_pick|^2) for every row still eligible
// (entries < 0 mark already-selected rows and are left untouched).
void UpdateMinSquaredDistance(const Matrix& points, std::size_t pick, std::vector<double>& min_sq,
                              Exec exec);

// Largest eligible entry, lowest index on ties; returns min_sq.size() when none.
std::size_t ArgMaxEligible(const std::vector<double>& min_sq, Exec exec);

// out[l * out_dim + o] = bias[o] + sum_c weight[o * in_dim + c] * in[c * locations + l]
// `in` is CHW (channels x locations); output is location-major.
void LinearForward(const float* in, std::size_t in_dim, std::size_t locations,
                   const double* weight, const double* bias, std::size_t out_dim, double* out,
                   Exec exec);

}  // namespace kernels
}  // namespace incanom
