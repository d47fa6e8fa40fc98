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

#include "incanom/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace incanom::kernels {

double SquaredDistance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

double Dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

std::vector<double> RowSquaredNorms(const float* rows, std::size_t n, std::size_t dim, Exec exec) {
  std::vector<double> out(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    std::span<const float> r(rows + static_cast<std::size_t>(i) * dim, dim);
    out[static_cast<std::size_t>(i)] = Dot(r, r);
  }
  return out;
}

namespace {

double KnnScoreOne(std::span<const float> q, double q_sq, const float* bank, std::size_t n_bank,
                   std::size_t dim, std::span<const double> bank_sq_norms, int k,
                   KnnAggregate agg, std::vector<double>& best) {
  best.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n_bank; ++j) {
    std::span<const float> b(bank + j * dim, dim);
    double d2 = q_sq + bank_sq_norms[j] - 2.0 * Dot(q, b);
    if (d2 < 0.0) d2 = 0.0;
    if (d2 >= best.back()) continue;
    std::size_t pos = best.size() - 1;
    while (pos > 0 && best[pos - 1] > d2) {
      best[pos] = best[pos - 1];
      --pos;
    }
    best[pos] = d2;
  }
  switch (agg) {
    case KnnAggregate::kNearest:
      return std::sqrt(best.front());
    case KnnAggregate::kMax:
      return std::sqrt(best.back());
    case KnnAggregate::kMean:
    default: {
      double sum = 0.0;
      for (double d2 : best) sum += std::sqrt(d2);
      return sum / static_cast<double>(best.size());
    }
  }
}

}  // namespace

std::vector<double> KnnScores(const float* queries, std::size_t n_queries, const float* bank,
                              std::size_t n_bank, std::size_t dim,
                              std::span<const double> bank_sq_norms, int k, KnnAggregate agg,
                              Exec exec) {
  std::vector<double> out(n_queries);
  const auto count = static_cast<std::ptrdiff_t>(n_queries);
#pragma omp parallel if (exec == Exec::kParallel)
  {
    std::vector<double> best;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      std::span<const float> q(queries + static_cast<std::size_t>(i) * dim, dim);
      out[static_cast<std::size_t>(i)] =
          KnnScoreOne(q, Dot(q, q), bank, n_bank, dim, bank_sq_norms, k, agg, best);
    }
  }
  return out;
}

void UpdateMinSquaredDistance(const Matrix& points, std::size_t pick, std::vector<double>& min_sq,
                              Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(points.rows);
  const auto anchor = points.row(pick);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double& slot = min_sq[static_cast<std::size_t>(i)];
    if (slot < 0.0) continue;
    double d = SquaredDistance(points.row(static_cast<std::size_t>(i)), anchor);
    if (d < slot) slot = d;
  }
}

std::size_t ArgMaxEligible(const std::vector<double>& min_sq, Exec exec) {
  const std::size_t none = min_sq.size();
  if (exec == Exec::kSerial) {
    std::size_t best = none;
    for (std::size_t i = 0; i < min_sq.size(); ++i) {
      if (min_sq[i] < 0.0) continue;
      if (best == none || min_sq[i] > min_sq[best]) best = i;
    }
    return best;
  }
  std::size_t best = none;
  const auto n = static_cast<std::ptrdiff_t>(min_sq.size());
#pragma omp parallel
  {
    std::size_t local = none;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      auto u = static_cast<std::size_t>(i);
      if (min_sq[u] < 0.0) continue;
      if (local == none || min_sq[u] > min_sq[local]) local = u;
    }
#pragma omp critical(incanom_argmax)
    {
      if (local != none &&
          (best == none || min_sq[local] > min_sq[best] ||
           (min_sq[local] == min_sq[best] && local < best))) {
        best = local;
      }
    }
  }
  return best;
}

void LinearForward(const float* in, std::size_t in_dim, std::size_t locations,
                   const double* weight, const double* bias, std::size_t out_dim, double* out,
                   Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(locations);
#pragma omp parallel if (exec == Exec::kParallel)
  {
    std::vector<double> x(in_dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t l = 0; l < n; ++l) {
      auto u = static_cast<std::size_t>(l);
      for (std::size_t c = 0; c < in_dim; ++c) x[c] = static_cast<double>(in[c * locations + u]);
      double* o = out + u * out_dim;
      for (std::size_t j = 0; j < out_dim; ++j) {
        const double* wrow = weight + j * in_dim;
        double acc = bias[j];
        for (std::size_t c = 0; c < in_dim; ++c) acc += wrow[c] * x[c];
        o[j] = acc;
      }
    }
  }
}

}  // namespace incanom::kernels
