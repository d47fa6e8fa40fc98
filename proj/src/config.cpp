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

#include "incanom/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

#include "incanom/binary_io.hpp"

namespace incanom {
namespace {

using Member = std::variant<int RunConfig::*, double RunConfig::*, bool RunConfig::*,
                            std::string RunConfig::*, std::uint64_t RunConfig::*>;

struct Field {
  const char* key;
  Member member;
};

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"seed_fraction", &RunConfig::seed_fraction},
      {"split_seed", &RunConfig::split_seed},
      {"image_size", &RunConfig::image_size},
      {"color", &RunConfig::color},
      {"featurizer_seed", &RunConfig::featurizer_seed},
      {"channels_fine", &RunConfig::channels_fine},
      {"channels_coarse", &RunConfig::channels_coarse},
      {"out_dim", &RunConfig::out_dim},
      {"adapter_seed", &RunConfig::adapter_seed},
      {"warmup_epochs", &RunConfig::warmup_epochs},
      {"lr", &RunConfig::lr},
      {"batch_size", &RunConfig::batch_size},
      {"proto_budget", &RunConfig::proto_budget},
      {"train_seed", &RunConfig::train_seed},
      {"coreset_ratio", &RunConfig::coreset_ratio},
      {"grid_cap", &RunConfig::grid_cap},
      {"k", &RunConfig::k},
      {"aggregate", &RunConfig::aggregate},
      {"top_q", &RunConfig::top_q},
      {"swag_samples", &RunConfig::swag_samples},
      {"swag_noise", &RunConfig::swag_noise},
      {"swag_seed", &RunConfig::swag_seed},
      {"swag_warmup", &RunConfig::swag_warmup},
      {"rounds", &RunConfig::rounds},
      {"budget", &RunConfig::budget},
      {"rank_mode", &RunConfig::rank_mode},
      {"strict_normal_only", &RunConfig::strict_normal_only},
      {"resume_policy", &RunConfig::resume_policy},
      {"tau_policy", &RunConfig::tau_policy},
      {"fine_tune_lr", &RunConfig::fine_tune_lr},
      {"round_seed", &RunConfig::round_seed},
      {"metric_pool_fraction", &RunConfig::metric_pool_fraction},
      {"freeze_seed_memory", &RunConfig::freeze_seed_memory},
      {"exec", &RunConfig::exec},
      {"heatmaps", &RunConfig::heatmaps},
  };
  return fields;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid value for " + key + ": '" + v + "'");
  }
  return out;
}

std::string DoubleText(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void OneOf(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return;
  }
  throw ConfigError("invalid value for " + key + ": '" + v + "'");
}

}  // namespace

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& f : Fields()) keys.emplace_back(f.key);
  return keys;
}

void SetConfigValue(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = Trim(raw);
  for (const auto& f : Fields()) {
    if (key != f.key) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, std::string>) {
            cfg.*member = value;
          } else if constexpr (std::is_same_v<T, bool>) {
            if (value == "true" || value == "1") cfg.*member = true;
            else if (value == "false" || value == "0") cfg.*member = false;
            else throw ConfigError("invalid value for " + key + ": '" + value + "'");
          } else if constexpr (std::is_same_v<T, double>) {
            double d = ParseNumber<double>(key, value);
            if (!std::isfinite(d)) throw ConfigError("invalid value for " + key + ": '" + value + "'");
            cfg.*member = d;
          } else {
            cfg.*member = ParseNumber<T>(key, value);
          }
        },
        f.member);
    return;
  }
  throw ConfigError("unknown config key: " + key);
}

void ApplyConfigText(RunConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    SetConfigValue(cfg, Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string FormatConfig(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : Fields()) {
    out += f.key;
    out += " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, std::string>) out += cfg.*member;
          else if constexpr (std::is_same_v<T, bool>) out += cfg.*member ? "true" : "false";
          else if constexpr (std::is_same_v<T, double>) out += DoubleText(cfg.*member);
          else out += std::to_string(cfg.*member);
        },
        f.member);
    out += '\n';
  }
  return out;
}

RunConfig LoadConfigFile(const std::filesystem::path& path, RunConfig base) {
  ApplyConfigText(base, ReadFileBytes(path));
  return base;
}

void RunConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(seed_fraction > 0.0 && seed_fraction < 1.0, "seed_fraction must be in (0, 1)");
  require(image_size >= kMinFeaturizeSize, "image_size must be at least 32");
  OneOf("color", color, {"gray", "rgb"});
  require(channels_fine >= 1 && channels_coarse >= 1, "featurizer channels must be positive");
  require(out_dim >= 1, "out_dim must be positive");
  require(warmup_epochs >= 0, "warmup_epochs must be non-negative");
  require(lr > 0.0, "lr must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(proto_budget >= 1, "proto_budget must be positive");
  require(coreset_ratio > 0.0 && coreset_ratio <= 1.0, "coreset_ratio must be in (0, 1]");
  require(grid_cap >= 1, "grid_cap must be positive");
  require(k >= 1, "k must be positive");
  OneOf("aggregate", aggregate, {"mean", "max", "nearest"});
  require(top_q > 0.0 && top_q <= 1.0, "top_q must be in (0, 1]");
  require(swag_samples >= 1, "swag_samples must be at least 1");
  require(swag_noise >= 0.0, "swag_noise must be non-negative");
  OneOf("swag_warmup", swag_warmup, {"identical", "last_two"});
  require(swag_warmup != "last_two" || warmup_epochs >= 2, "swag_warmup=last_two needs warmup_epochs >= 2");
  OneOf("rank_mode", rank_mode, {"boundary", "uncert"});
  OneOf("resume_policy", resume_policy, {"best_so_far", "last"});
  OneOf("tau_policy", tau_policy, {"reset", "persist"});
  OneOf("exec", exec, {"parallel", "serial"});
  require(heatmaps >= 0, "heatmaps must be non-negative");
  Rounds().Validate();
}

PipelineOptions RunConfig::Pipeline() const {
  PipelineOptions p;
  p.out_dim = out_dim;
  p.adapter_seed = adapter_seed;
  p.warmup.epochs = warmup_epochs;
  p.warmup.lr = lr;
  p.warmup.batch_size = batch_size;
  p.warmup.proto_budget = proto_budget;
  p.warmup.rng_seed = train_seed;
  p.memory.coreset_ratio = coreset_ratio;
  p.memory.grid_cap = grid_cap;
  p.score.k = k;
  p.score.top_q = top_q;
  p.score.aggregate = aggregate == "max"       ? KnnAggregate::kMax
                      : aggregate == "nearest" ? KnnAggregate::kNearest
                                               : KnnAggregate::kMean;
  p.swag_samples = swag_samples;
  p.swag_noise = swag_noise;
  p.swag_seed = swag_seed;
  p.swag_warmup = swag_warmup == "last_two" ? SwagWarmup::kLastTwo : SwagWarmup::kIdentical;
  p.exec = exec == "serial" ? Exec::kSerial : Exec::kParallel;
  return p;
}

RoundConfig RunConfig::Rounds() const {
  RoundConfig r;
  r.rounds = rounds;
  r.budget = budget;
  r.strict_normal_only = strict_normal_only;
  r.resume_policy = ParseResumePolicy(resume_policy);
  r.rank_mode = ParseRankMode(rank_mode);
  r.fine_tune_lr = fine_tune_lr;
  r.tau_policy = ParseTauPolicy(tau_policy);
  r.rng_seed = round_seed;
  r.metric_pool_fraction = metric_pool_fraction;
  r.freeze_seed_memory = freeze_seed_memory;
  return r;
}

FilterBankOptions RunConfig::Featurizer() const {
  FilterBankOptions f;
  f.in_channels = color == "rgb" ? 3 : 1;
  f.channels_fine = channels_fine;
  f.channels_coarse = channels_coarse;
  f.rng_seed = featurizer_seed;
  return f;
}

ColorMode RunConfig::Color() const { return color == "rgb" ? ColorMode::kRgb : ColorMode::kGray; }

}  // namespace incanom
