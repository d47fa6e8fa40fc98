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

#include <span>
#include <string>
#include <vector>

namespace incanom {

struct GateCalibration {
  double mu_s = 0.0;
  double sigma_s = 1.0;
  double mu_u = 0.0;
  double sigma_u = 0.0;
  bool use_u = false;
  bool degenerate_scores = false;  // sigma_s was floored
};

inline constexpr double kSigmaFloor = 1e-12;
inline constexpr double kUseUncertaintyThreshold = 1e-6;
inline constexpr double kTauStrict = 1.0;
inline constexpr double kTauRelaxed = 1.5;

// Population moments (ddof 0) of the seed scores and uncertainties.
GateCalibration Calibrate(std::span<const double> seed_scores, std::span<const double> seed_uncerts);

struct GateVerdict {
  double z_s = 0.0;
  double z_u = 0.0;  // 0 when the uncertainty gate is off
  bool admitted = false;
  double tau_used = kTauStrict;
};

// admitted <=> z_s <= tau && (!use_u || z_u <= tau)
GateVerdict Gate(double score, double uncert, const GateCalibration& calib, double tau);

enum class RankMode { kBoundary, kUncert };

RankMode ParseRankMode(const std::string& s);
std::string ToString(RankMode m);

struct Candidate {
  int id = 0;
  double score = 0.0;
  double uncert = 0.0;
};

struct Selection {
  std::vector<int> chosen;            // ranked, at most `budget`
  double tau_used = kTauStrict;
  std::vector<GateVerdict> verdicts;  // per candidate, evaluated at tau_used
  std::vector<int> rank;              // 1-based rank within the safe set, 0 if unsafe
};

// Safe set at `tau`; when empty and tau < kTauRelaxed, one relaxation to
// kTauRelaxed. The safe set is sorted by score (boundary) or z_u (uncert),
// descending, ties by ascending id, and the first min(budget, |safe|) returned.
Selection Select(std::span<const Candidate> candidates, const GateCalibration& calib, int budget,
                 RankMode mode, double tau = kTauStrict);

}  // namespace incanom
