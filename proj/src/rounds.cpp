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

#include "incanom/rounds.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace incanom {
namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int LabelOf(const RoundInputs& in, int id) {
  auto it = in.labels.find(id);
  return it == in.labels.end() ? 0 : it->second;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<int> SeedAndAccepted(const RoundInputs& in, const std::vector<int>& accepted) {
  std::vector<int> ids = in.seed_ids;
  ids.insert(ids.end(), accepted.begin(), accepted.end());
  return ids;
}

Checkpoint MakeCheckpoint(const AdapterParams& params, const AdamState& optimizer,
                          const SwagState& swag, const RoundState& state, const Rng& rng) {
  Checkpoint ck;
  ck.adapter = params;
  ck.optimizer = optimizer;
  ck.swag = swag;
  ck.state = state;
  ck.rng_state = rng.SaveState();
  return ck;
}

}  // namespace

ResumePolicy ParseResumePolicy(const std::string& s) {
  if (s == "best_so_far") return ResumePolicy::kBestSoFar;
  if (s == "last") return ResumePolicy::kLast;
  throw ConfigError("invalid resume policy: " + s);
}

std::string ToString(ResumePolicy p) { return p == ResumePolicy::kBestSoFar ? "best_so_far" : "last"; }

TauPolicy ParseTauPolicy(const std::string& s) {
  if (s == "reset") return TauPolicy::kReset;
  if (s == "persist") return TauPolicy::kPersist;
  throw ConfigError("invalid tau policy: " + s);
}

std::string ToString(TauPolicy p) { return p == TauPolicy::kReset ? "reset" : "persist"; }

void RoundConfig::Validate() const {
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (budget < 1) throw ConfigError("budget must be at least 1");
  if (!(fine_tune_lr > 0.0)) throw ConfigError("fine_tune_lr must be positive");
  if (!(metric_pool_fraction > 0.0 && metric_pool_fraction <= 1.0)) {
    throw ConfigError("metric_pool_fraction must be in (0, 1]");
  }
}

std::string GateLogHeader() { return "round,id,s,u,z_s,z_u,tau,admitted,rank\n"; }

std::string FormatGateLogRow(const GateLogRow& r) {
  std::string out = std::to_string(r.round) + ',' + std::to_string(r.id) + ',' + Num(r.s) + ',' +
                    Num(r.u) + ',' + Num(r.z_s) + ',' + Num(r.z_u) + ',' + Num(r.tau) + ',' +
                    (r.admitted ? "1" : "0") + ',' + std::to_string(r.rank) + '\n';
  return out;
}

std::string ContaminationReport::Csv() const {
  std::ostringstream os;
  os << "round,scored,safe,tau,selected,admitted,admitted_anomalies,alpha,beta,memory_size,"
        "memory_anomaly_rows,metric,improved\n";
  for (const auto& r : rounds) {
    os << r.round << ',' << r.scored << ',' << r.safe << ',' << Num(r.tau_used) << ','
       << r.selected.size() << ',' << r.admitted.size() << ',' << r.admitted_anomalies << ','
       << Num(r.alpha) << ',' << Num(r.beta) << ',' << r.memory_size << ',' << r.memory_anomaly_rows
       << ',' << Num(r.metric) << ',' << (r.improved ? 1 : 0) << '\n';
  }
  return os.str();
}

MetricSubset ChooseMetricSubset(const RoundInputs& in, const RoundConfig& cfg) {
  MetricSubset out;
  out.seed_ids = in.seed_ids;
  if (!in.pool_ids.empty()) {
    std::vector<int> pool = in.pool_ids;
    Rng rng(MixSeed(cfg.rng_seed, 0x6d6574726963ULL));
    rng.Shuffle(pool);
    pool.resize(std::min(pool.size(), FractionCount(cfg.metric_pool_fraction, pool.size())));
    std::sort(pool.begin(), pool.end());
    out.pool_ids = std::move(pool);
  }
  return out;
}

MetricValue CheckpointMetric(const RoundInputs& in, const MetricSubset& subset,
                             const std::vector<int>& accepted, const AdapterParams& params,
                             const PipelineOptions& opts) {
  const auto& set = *in.features;
  MetricValue out;
  if (!in.validation_ids.empty()) {
    std::vector<int> labels;
    bool pos = false, neg = false;
    for (int id : in.validation_ids) {
      labels.push_back(LabelOf(in, id));
      (labels.back() == 1 ? pos : neg) = true;
    }
    if (pos && neg) {
      const auto ids = SeedAndAccepted(in, accepted);
      const auto bank = BuildMemoryForIds(set, ids, params, opts.memory,
                                          MemorySource::kSeedAndAccepted, opts.exec);
      const BankIndex index(bank, opts.exec);
      const auto scores = ScoreIds(set, in.validation_ids, params, index, opts.score, opts.exec);
      out.value = RocAuc(scores, labels);
      return out;
    }
  }
  if (subset.seed_ids.empty() || subset.pool_ids.empty()) throw DataError("empty fixed subset");
  const auto bank = BuildMemoryForIds(set, in.seed_ids, params, opts.memory, MemorySource::kSeed, opts.exec);
  const BankIndex index(bank, opts.exec);
  out.seed_scores = ScoreIds(set, subset.seed_ids, params, index, opts.score, opts.exec);
  out.pool_scores = ScoreIds(set, subset.pool_ids, params, index, opts.score, opts.exec);
  out.value = Mean(out.pool_scores) - Mean(out.seed_scores);
  return out;
}

RoundsResult RunRounds(const RoundInputs& in, const RoundStart& start, const GateCalibration& calib,
                       const RoundConfig& cfg, const PipelineOptions& opts, const RoundSink& sink,
                       const std::optional<RoundResume>& resume) {
  cfg.Validate();
  if (in.features == nullptr) throw DataError("no embeddings");
  if (in.seed_ids.empty()) throw DataError("empty seed");
  const auto& set = *in.features;
  Gather(set, in.seed_ids);
  Gather(set, in.pool_ids);
  if (cfg.strict_normal_only) {
    for (int id : in.pool_ids) {
      if (in.labels.find(id) == in.labels.end()) {
        throw DataError("strict mode needs a label for pool id " + std::to_string(id));
      }
    }
  }
  std::map<int, int> local_of;
  for (std::size_t j = 0; j < in.pool_ids.size(); ++j) local_of[in.pool_ids[j]] = static_cast<int>(j);

  const auto subset = ChooseMetricSubset(in, cfg);

  AdapterParams params = start.params;
  AdamState optimizer = start.optimizer;
  SwagState swag = start.swag;
  RoundState state;
  Rng rng(MixSeed(cfg.rng_seed, 0x726f756e64ULL));
  Checkpoint best;

  if (resume) {
    params = resume->last.adapter;
    optimizer = resume->last.optimizer;
    swag = resume->last.swag;
    state = resume->last.state;
    rng.LoadState(resume->last.rng_state);
    best = resume->best;
  } else {
    // With nothing to compare against the loop ends at once; keep -inf.
    if (!subset.pool_ids.empty() || !in.validation_ids.empty()) {
      state.best_metric = CheckpointMetric(in, subset, state.accepted, params, opts).value;
    }
    state.best_round = 0;
    best = MakeCheckpoint(params, optimizer, swag, state, rng);
    if (sink.on_best) sink.on_best(best);
    if (sink.on_last) sink.on_last(best);
  }

  RoundsResult result;
  const int first_round = state.round_index + 1;
  for (int r = first_round; r <= cfg.rounds; ++r) {
    const std::uint64_t round_seed = rng.NextU64();
    if (cfg.resume_policy == ResumePolicy::kBestSoFar) {
      params = best.adapter;
      optimizer = best.optimizer;
    }
    RoundRecord rec;
    rec.round = r;

    const auto mem_ids = cfg.freeze_seed_memory ? in.seed_ids : SeedAndAccepted(in, state.accepted);
    const auto bank = BuildMemoryForIds(
        set, mem_ids, params, opts.memory,
        cfg.freeze_seed_memory ? MemorySource::kSeed : MemorySource::kSeedAndAccepted, opts.exec);
    rec.memory_size = bank.size();
    for (int src : bank.source_ids) rec.memory_anomaly_rows += LabelOf(in, src) == 1 ? 1 : 0;

    std::vector<int> unused;  // global ids of J, in pool order
    {
      std::set<int> used(state.used.begin(), state.used.end());
      for (std::size_t j = 0; j < in.pool_ids.size(); ++j) {
        if (!used.count(static_cast<int>(j))) unused.push_back(in.pool_ids[j]);
      }
    }
    if (unused.empty()) {
      rec.note = "pool exhausted";
      if (sink.on_round) sink.on_round(rec);
      result.report.rounds.push_back(std::move(rec));
      break;
    }

    const BankIndex index(bank, opts.exec);
    const auto scores = ScoreIds(set, unused, params, index, opts.score, opts.exec);
    std::vector<double> uncerts(unused.size(), 0.0);
    if (calib.use_u) uncerts = UncertaintyIds(set, unused, swag, params, index, opts.uncertainty());

    std::vector<Candidate> cands(unused.size());
    for (std::size_t i = 0; i < unused.size(); ++i) cands[i] = {unused[i], scores[i], uncerts[i]};
    const double tau = cfg.tau_policy == TauPolicy::kReset ? kTauStrict : state.tau;
    const auto sel = Select(cands, calib, cfg.budget, cfg.rank_mode, tau);
    if (cfg.tau_policy == TauPolicy::kPersist) state.tau = sel.tau_used;

    rec.scored = unused.size();
    rec.tau_used = sel.tau_used;
    std::vector<GateLogRow> gates(unused.size());
    for (std::size_t i = 0; i < unused.size(); ++i) {
      const auto& v = sel.verdicts[i];
      gates[i] = {r, unused[i], scores[i], uncerts[i], v.z_s, v.z_u, sel.tau_used, v.admitted, sel.rank[i]};
      rec.safe += v.admitted ? 1 : 0;
      rec.normals_scored += LabelOf(in, unused[i]) == 0 ? 1 : 0;
    }
    if (sink.on_gates) sink.on_gates(gates);
    result.gate_log.insert(result.gate_log.end(), gates.begin(), gates.end());

    auto finish_round = [&](bool fine_tuned) {
      state.round_index = r;
      rec.fine_tuned = fine_tuned;
      std::size_t normals = 0;
      for (int id : rec.admitted) {
        if (LabelOf(in, id) == 1) ++rec.admitted_anomalies;
        else ++normals;
      }
      rec.alpha = rec.admitted.empty() ? 0.0
                                       : static_cast<double>(rec.admitted_anomalies) /
                                             static_cast<double>(rec.admitted.size());
      rec.beta = rec.normals_scored == 0 ? 0.0
                                         : static_cast<double>(normals) /
                                               static_cast<double>(rec.normals_scored);
    };

    if (sel.chosen.empty()) {
      rec.note = "empty safe set";
      finish_round(false);
      rec.metric = state.best_metric;
      auto last = MakeCheckpoint(params, optimizer, swag, state, rng);
      if (sink.on_last) sink.on_last(last);
      if (sink.on_round) sink.on_round(rec);
      result.report.rounds.push_back(std::move(rec));
      continue;
    }

    rec.selected = sel.chosen;
    for (int id : sel.chosen) state.used.push_back(local_of.at(id));
    std::sort(state.used.begin(), state.used.end());

    std::vector<int> admitted;
    for (int id : sel.chosen) {
      if (!cfg.strict_normal_only || LabelOf(in, id) == 0) admitted.push_back(id);
    }
    rec.admitted = admitted;
    if (admitted.empty()) {
      rec.note = "strict filter removed every selection";
      finish_round(false);
      rec.metric = state.best_metric;
      auto last = MakeCheckpoint(params, optimizer, swag, state, rng);
      if (sink.on_last) sink.on_last(last);
      if (sink.on_round) sink.on_round(rec);
      result.report.rounds.push_back(std::move(rec));
      continue;
    }

    const auto protos = SelectPrototypes(bank.vectors, opts.warmup.proto_budget, opts.exec);
    optimizer.lr = cfg.fine_tune_lr;
    TrainOptions topts;
    topts.epochs = 1;
    topts.batch_size = opts.warmup.batch_size;
    topts.rng_seed = round_seed;
    TrainEpochs(Gather(set, admitted), params, optimizer, protos, topts, opts.exec);
    SwagSnapshot(swag, params);
    state.accepted.insert(state.accepted.end(), admitted.begin(), admitted.end());
    finish_round(true);

    auto metric = CheckpointMetric(in, subset, state.accepted, params, opts);
    rec.metric = metric.value;
    rec.metric_seed_scores = std::move(metric.seed_scores);
    rec.metric_pool_scores = std::move(metric.pool_scores);
    if (metric.value > state.best_metric) {
      state.best_metric = metric.value;
      state.best_round = r;
      rec.improved = true;
    }
    auto last = MakeCheckpoint(params, optimizer, swag, state, rng);
    if (rec.improved) {
      best = last;
      if (sink.on_best) sink.on_best(best);
    }
    if (sink.on_last) sink.on_last(last);
    if (sink.on_round) sink.on_round(rec);
    result.report.rounds.push_back(std::move(rec));
  }

  // best_overall may predate later admissions; its run state is refreshed so
  // the returned state reflects every round.
  result.adapter = best.adapter;
  result.optimizer = optimizer;
  result.swag = swag;
  result.state = state;
  const auto mem_ids = cfg.freeze_seed_memory ? in.seed_ids : SeedAndAccepted(in, state.accepted);
  result.memory = BuildMemoryForIds(
      set, mem_ids, result.adapter, opts.memory,
      cfg.freeze_seed_memory ? MemorySource::kSeed : MemorySource::kSeedAndAccepted, opts.exec);
  return result;
}

}  // namespace incanom
