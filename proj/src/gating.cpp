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

#include "incanom/gating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "incanom/common.hpp"

namespace incanom {
namespace {

void Moments(std::span<const double> v, double& mean, double& stddev) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  stddev = std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

GateCalibration Calibrate(std::span<const double> seed_scores, std::span<const double> seed_uncerts) {
  if (seed_scores.empty() || seed_uncerts.empty()) throw DataError("calibration needs seed samples");
  GateCalibration c;
  Moments(seed_scores, c.mu_s, c.sigma_s);
  Moments(seed_uncerts, c.mu_u, c.sigma_u);
  if (!(c.sigma_s > 0.0)) {
    c.sigma_s = kSigmaFloor;
    c.degenerate_scores = true;
  }
  c.use_u = c.sigma_u > kUseUncertaintyThreshold;
  if (!std::isfinite(c.mu_s) || !std::isfinite(c.mu_u) || !std::isfinite(c.sigma_u)) {
    throw NumericError("calibration produced non-finite moments");
  }
  return c;
}

GateVerdict Gate(double score, double uncert, const GateCalibration& calib, double tau) {
  GateVerdict v;
  v.tau_used = tau;
  v.z_s = (score - calib.mu_s) / calib.sigma_s;
  v.z_u = calib.use_u ? (uncert - calib.mu_u) / calib.sigma_u : 0.0;
  v.admitted = v.z_s <= tau && (!calib.use_u || v.z_u <= tau);
  return v;
}

RankMode ParseRankMode(const std::string& s) {
  if (s == "boundary") return RankMode::kBoundary;
  if (s == "uncert") return RankMode::kUncert;
  throw ConfigError("invalid mode '" + s + "' (expected boundary|uncert)");
}

std::string ToString(RankMode m) { return m == RankMode::kBoundary ? "boundary" : "uncert"; }

Selection Select(std::span<const Candidate> candidates, const GateCalibration& calib, int budget,
                 RankMode mode, double tau) {
  if (budget < 1) throw ConfigError("budget must be at least 1");
  if (mode != RankMode::kBoundary && mode != RankMode::kUncert) throw ConfigError("invalid mode");
  Selection sel;
  auto evaluate = [&](double t) {
    sel.tau_used = t;
    sel.verdicts.clear();
    std::size_t safe = 0;
    for (const auto& c : candidates) {
      sel.verdicts.push_back(Gate(c.score, c.uncert, calib, t));
      if (sel.verdicts.back().admitted) ++safe;
    }
    return safe;
  };
  std::size_t safe = evaluate(tau);
  if (safe == 0 && tau < kTauRelaxed) safe = evaluate(kTauRelaxed);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (sel.verdicts[i].admitted) order.push_back(i);
  }
  auto key = [&](std::size_t i) {
    return mode == RankMode::kBoundary ? candidates[i].score : sel.verdicts[i].z_u;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ka = key(a), kb = key(b);
    if (ka != kb) return ka > kb;
    return candidates[a].id < candidates[b].id;
  });
  sel.rank.assign(candidates.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) sel.rank[order[r]] = static_cast<int>(r + 1);
  const std::size_t take = std::min(order.size(), static_cast<std::size_t>(budget));
  for (std::size_t r = 0; r < take; ++r) sel.chosen.push_back(candidates[order[r]].id);
  return sel;
}

}  // namespace incanom
