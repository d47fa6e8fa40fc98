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

#include "incanom/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace incanom {
namespace {

enum class Role { kSeed, kPoolNormal, kPoolAnomaly, kTestNormal, kTestAnomaly };

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void SynthSpec::Validate() const {
  if (dim < 2) throw ConfigError("degenerate spec: dim must be at least 2");
  if (n_seed < 1) throw ConfigError("degenerate spec: need at least one seed image");
  if (n_pool_normal < 0 || n_pool_anomaly < 0 || n_test_normal < 0 || n_test_anomaly < 0) {
    throw ConfigError("degenerate spec: counts must be non-negative");
  }
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw ConfigError("degenerate spec: margin must be >= 0");
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) throw ConfigError("degenerate spec: noise_std must be > 0");
  if (grid < 1 || n_modes < 1) throw ConfigError("degenerate spec: grid and modes must be positive");
  if (!(anomaly_patch_fraction > 0.0 && anomaly_patch_fraction <= 1.0)) {
    throw ConfigError("degenerate spec: anomaly_patch_fraction must be in (0, 1]");
  }
  if (noise_rank < 0 || noise_rank >= dim) throw ConfigError("degenerate spec: noise_rank must be in [0, dim)");
  if (!(off_manifold_noise >= 0.0)) throw ConfigError("degenerate spec: off_manifold_noise must be >= 0");
  if (!(center_spread >= 0.0)) throw ConfigError("degenerate spec: center_spread must be >= 0");
}

SynthData Generate(const SynthSpec& spec) {
  spec.Validate();
  Rng rng(MixSeed(spec.rng_seed, 0x73796e7468ULL));
  const auto dim = static_cast<std::size_t>(spec.dim);
  std::vector<double> centers(static_cast<std::size_t>(spec.n_modes) * dim);
  for (double& c : centers) c = spec.center_spread * spec.noise_std * rng.Normal();
  // Gram-Schmidt over the noise basis followed by the anomaly direction.
  const auto rank = static_cast<std::size_t>(spec.noise_rank);
  std::vector<std::vector<double>> basis;
  for (std::size_t b = 0; b <= rank; ++b) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.Normal();
    for (const auto& u : basis) {
      double dot = 0.0;
      for (std::size_t c = 0; c < dim; ++c) dot += v[c] * u[c];
      for (std::size_t c = 0; c < dim; ++c) v[c] -= dot * u[c];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  const std::vector<double> dir = basis.back();
  basis.pop_back();

  std::vector<Role> pool(static_cast<std::size_t>(spec.n_pool_normal), Role::kPoolNormal);
  pool.insert(pool.end(), static_cast<std::size_t>(spec.n_pool_anomaly), Role::kPoolAnomaly);
  rng.Shuffle(pool);
  std::vector<Role> test(static_cast<std::size_t>(spec.n_test_normal), Role::kTestNormal);
  test.insert(test.end(), static_cast<std::size_t>(spec.n_test_anomaly), Role::kTestAnomaly);
  rng.Shuffle(test);
  std::vector<Role> roles(static_cast<std::size_t>(spec.n_seed), Role::kSeed);
  roles.insert(roles.end(), pool.begin(), pool.end());
  roles.insert(roles.end(), test.begin(), test.end());

  const int patches = spec.grid * spec.grid;
  const int shifted = std::max(1, static_cast<int>(RoundHalfUp(spec.anomaly_patch_fraction * patches)));
  SynthData out;
  out.split.seed_fraction = static_cast<double>(spec.n_seed) /
                            static_cast<double>(spec.n_seed + spec.n_pool_normal);
  out.split.rng_seed = spec.rng_seed;
  for (std::size_t id = 0; id < roles.size(); ++id) {
    const Role role = roles[id];
    const bool anomaly = role == Role::kPoolAnomaly || role == Role::kTestAnomaly;
    const bool is_test = role == Role::kTestNormal || role == Role::kTestAnomaly;
    ManifestEntry e;
    e.path = "synth://" + std::to_string(id);
    e.label = anomaly ? 1 : 0;
    e.id = static_cast<int>(id);
    e.split = is_test ? Split::kTest : Split::kTrain;
    out.manifest.entries.push_back(e);
    if (role == Role::kSeed) out.split.seed_ids.push_back(e.id);
    else if (!is_test) out.split.pool_ids.push_back(e.id);
    else out.test_ids.push_back(e.id);

    Rng img(MixSeed(spec.rng_seed, id, 0x696d67ULL));
    FeatureMap fm;
    fm.channels = spec.dim;
    fm.height = spec.grid;
    fm.width = spec.grid;
    fm.data.assign(fm.size(), 0.0f);
    std::vector<int> order(static_cast<std::size_t>(patches));
    for (int p = 0; p < patches; ++p) order[static_cast<std::size_t>(p)] = p;
    img.Shuffle(order);
    std::vector<char> is_shifted(static_cast<std::size_t>(patches), 0);
    if (anomaly) {
      for (int i = 0; i < shifted; ++i) is_shifted[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    }
    std::vector<double> coef(rank);
    for (int p = 0; p < patches; ++p) {
      const auto mode = img.Below(static_cast<std::size_t>(spec.n_modes));
      for (double& a : coef) a = img.Normal();
      for (std::size_t c = 0; c < dim; ++c) {
        double v = centers[mode * dim + c];
        if (rank == 0) {
          v += spec.noise_std * img.Normal();
        } else {
          for (std::size_t b = 0; b < rank; ++b) v += spec.noise_std * coef[b] * basis[b][c];
          v += spec.off_manifold_noise * spec.noise_std * img.Normal();
        }
        if (is_shifted[static_cast<std::size_t>(p)]) v += spec.margin * spec.noise_std * dir[c];
        fm.data[c * static_cast<std::size_t>(patches) + static_cast<std::size_t>(p)] = static_cast<float>(v);
      }
    }
    out.embeddings[e.id].scales.push_back(std::move(fm));
  }
  return out;
}

SynthExperiment SynthExperiment::Defaults() {
  SynthExperiment exp;
  exp.pipeline.out_dim = 16;
  exp.pipeline.warmup.epochs = 5;
  exp.pipeline.warmup.lr = 1e-4;
  exp.pipeline.warmup.batch_size = 32;
  exp.pipeline.warmup.proto_budget = 512;
  exp.pipeline.memory.coreset_ratio = 0.3;
  exp.pipeline.memory.grid_cap = 16;
  exp.rounds.rounds = 5;
  exp.rounds.budget = 20;
  return exp;
}

RoundInputs MakeRoundInputs(const SynthData& data) {
  RoundInputs in;
  in.features = &data.embeddings;
  in.seed_ids = data.split.seed_ids;
  in.pool_ids = data.split.pool_ids;
  for (const auto& e : data.manifest.entries) in.labels[e.id] = e.label;
  return in;
}

SynthRun RunSynthPipeline(const SynthData& data, const SynthExperiment& exp, bool evaluate) {
  SynthRun run;
  run.warmup = RunWarmupStage(data.embeddings, data.split.seed_ids, exp.pipeline);
  run.calibration = RunCalibrationStage(data.embeddings, data.split.seed_ids, run.warmup.params,
                                        run.warmup.swag, exp.pipeline);
  const auto in = MakeRoundInputs(data);
  RoundStart start{run.warmup.params, run.warmup.optimizer, run.warmup.swag};
  run.rounds = RunRounds(in, start, run.calibration.calibration, exp.rounds, exp.pipeline);

  double za = 0.0, zn = 0.0;
  std::size_t na = 0, nn = 0;
  for (const auto& g : run.rounds.gate_log) {
    if (g.round != 1) continue;
    if (in.labels.at(g.id) == 1) {
      za += g.z_s;
      ++na;
    } else {
      zn += g.z_s;
      ++nn;
    }
  }
  if (na > 0 && nn > 0) {
    run.separation = za / static_cast<double>(na) - zn / static_cast<double>(nn);
  }

  if (evaluate && !data.test_ids.empty()) {
    std::vector<int> labels;
    for (int id : data.test_ids) labels.push_back(in.labels.at(id));
    run.eval = RunEvalStage(data.embeddings, data.test_ids, labels, run.rounds.adapter,
                            run.rounds.memory, exp.pipeline.score, exp.pipeline.exec);
  }
  return run;
}

ContaminationReport VerifyTheorem1(const SynthSpec& spec, SynthExperiment exp) {
  exp.rounds.strict_normal_only = true;
  const auto data = Generate(spec);
  const auto run = RunSynthPipeline(data, exp, false);
  const auto labels = MakeRoundInputs(data).labels;
  for (const auto& rec : run.rounds.report.rounds) {
    for (int id : rec.admitted) {
      if (labels.at(id) == 1) {
        throw ContaminationError("anomaly admitted in round " + std::to_string(rec.round) +
                                 ": id " + std::to_string(id));
      }
    }
    if (rec.memory_anomaly_rows > 0) {
      throw ContaminationError("memory rebuilt in round " + std::to_string(rec.round) +
                               " holds anomalous rows");
    }
  }
  for (int id : run.rounds.state.accepted) {
    if (labels.at(id) == 1) throw ContaminationError("accepted set holds anomaly id " + std::to_string(id));
  }
  for (int id : run.rounds.memory.source_ids) {
    if (labels.at(id) == 1) throw ContaminationError("final memory holds anomaly id " + std::to_string(id));
  }
  return run.rounds.report;
}

std::vector<SweepRow> SweepProp1(const SynthSpec& base, const std::vector<double>& margins,
                                 const std::vector<int>& k_values,
                                 const std::vector<std::uint64_t>& seeds, SynthExperiment exp) {
  if (base.n_pool_anomaly < 50) {
    throw ConfigError("insufficient Monte-Carlo samples: need at least 50 pool anomalies");
  }
  exp.rounds.strict_normal_only = false;
  std::vector<SweepRow> rows;
  for (double m : margins) {
    for (int k : k_values) {
      for (auto seed : seeds) {
        SynthSpec spec = base;
        spec.margin = m;
        spec.rng_seed = seed;
        SynthExperiment e = exp;
        e.pipeline.swag_samples = k;
        e.pipeline.adapter_seed = seed;
        e.pipeline.swag_seed = seed;
        e.pipeline.warmup.rng_seed = seed;
        e.rounds.rng_seed = seed;
        const auto data = Generate(spec);
        const auto run = RunSynthPipeline(data, e, false);
        std::size_t anomalies = 0, normals = 0;
        for (int id : run.rounds.state.accepted) {
          (data.manifest.label(id) == 1 ? anomalies : normals) += 1;
        }
        SweepRow row;
        row.margin = m;
        row.K = k;
        row.seed = seed;
        row.alpha = static_cast<double>(anomalies) / static_cast<double>(spec.n_pool_anomaly);
        row.beta = spec.n_pool_normal > 0
                       ? static_cast<double>(normals) / static_cast<double>(spec.n_pool_normal)
                       : 0.0;
        row.separation = run.separation;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "margin,K,alpha,beta,seed\n";
  for (const auto& r : rows) {
    os << Num(r.margin) << ',' << r.K << ',' << Num(r.alpha) << ',' << Num(r.beta) << ',' << r.seed << '\n';
  }
  return os.str();
}

TrendCheck CheckTrend(const std::vector<SweepRow>& rows) {
  std::map<double, std::pair<double, double>> sums;
  std::map<double, int> counts;
  for (const auto& r : rows) {
    sums[r.margin].first += r.alpha;
    sums[r.margin].second += r.beta;
    counts[r.margin] += 1;
  }
  TrendCheck t;
  for (const auto& [m, s] : sums) {
    t.margins.push_back(m);
    t.mean_alpha.push_back(s.first / counts[m]);
    t.mean_beta.push_back(s.second / counts[m]);
    if (m >= 3.0) t.max_alpha_at_3 = std::max(t.max_alpha_at_3, t.mean_alpha.back());
  }
  for (std::size_t i = 1; i < t.mean_alpha.size(); ++i) {
    if (t.mean_alpha[i] > t.mean_alpha[i - 1]) ++t.inversions;
  }
  return t;
}

double BaselineAuc(const SynthData& data, const SynthExperiment& exp) {
  const auto& opts = exp.pipeline;
  auto seed = Gather(data.embeddings, data.split.seed_ids);
  std::vector<int> in_channels;
  for (const auto& s : seed.front()->scales) in_channels.push_back(s.channels);
  AdapterParams params = InitAdapter(in_channels, opts.out_dim, opts.adapter_seed);
  InitRunningStats(params, seed);
  std::vector<int> ids = data.split.seed_ids;
  ids.insert(ids.end(), data.split.pool_ids.begin(), data.split.pool_ids.end());
  const auto bank = BuildMemoryForIds(data.embeddings, ids, params, opts.memory,
                                      MemorySource::kSeedAndAccepted, opts.exec);
  std::vector<int> labels;
  for (int id : data.test_ids) labels.push_back(data.manifest.label(id));
  const auto ev = RunEvalStage(data.embeddings, data.test_ids, labels, params, bank, opts.score, opts.exec);
  if (!ev.report.roc_auc) throw DataError("baseline test set lacks both classes");
  return *ev.report.roc_auc;
}

Comparison CompareWithBaseline(const SynthSpec& spec, const SynthExperiment& exp) {
  const auto data = Generate(spec);
  Comparison c;
  c.baseline_auc = BaselineAuc(data, exp);
  const auto run = RunSynthPipeline(data, exp, true);
  if (!run.eval || !run.eval->report.roc_auc) throw DataError("test set lacks both classes");
  c.proposed_auc = *run.eval->report.roc_auc;
  return c;
}

}  // namespace incanom
