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

#include "incanom/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "incanom/binary_io.hpp"
#include "incanom/checkpoint.hpp"
#include "incanom/config.hpp"
#include "incanom/dataio.hpp"
#include "incanom/embedding_file.hpp"
#include "incanom/eval.hpp"
#include "incanom/featurizer.hpp"
#include "incanom/pipeline.hpp"
#include "incanom/rounds.hpp"
#include "incanom/synthlab.hpp"
#include "json.hpp"

namespace incanom {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class LockBusy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exclusive per-run-directory lock held for the lifetime of a command.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST) throw LockBusy("run directory is locked by another process: " + path_.string());
      throw DataError("cannot create lock file " + path_.string());
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) {
      // The lock is held either way; the pid is informational.
    }
  }
  ~RunLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

// Artifact names inside a run directory.
struct RunPaths {
  fs::path dir;
  fs::path config() const { return dir / "config.txt"; }
  fs::path manifest() const { return dir / "manifest.csv"; }
  fs::path split() const { return dir / "split.json"; }
  fs::path embeddings() const { return dir / "embeddings.bin"; }
  fs::path warmup() const { return dir / "checkpoints" / "warmup.bin"; }
  fs::path calibration() const { return dir / "calibration.json"; }
  fs::path best() const { return dir / "checkpoints" / "best.bin"; }
  fs::path last() const { return dir / "checkpoints" / "last.bin"; }
  fs::path final_state() const { return dir / "checkpoints" / "final.bin"; }
  fs::path logs() const { return dir / "logs"; }
  fs::path report() const { return dir / "report"; }
};

void Require(const fs::path& p, const std::string& stage) {
  if (!fs::exists(p)) {
    throw DataError(stage + " missing: expected " + p.string() + " (run `" + stage + "` first)");
  }
}

void RequireCalibration(const RunPaths& rp) {
  if (!fs::exists(rp.calibration())) {
    throw DataError("calibration missing: expected " + rp.calibration().string() +
                    " (run `calibrate` first)");
  }
}

struct ConfigFlag {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

struct Common {
  std::string run_dir;
  std::string config_file;
  std::vector<std::string> sets;
  std::deque<ConfigFlag> flags;
  std::string rng_seed;  // sets every seed key at once
  CLI::Option* rng_seed_option = nullptr;
};

void AddCommon(CLI::App* app, Common& c, bool with_run_dir = true) {
  if (with_run_dir) {
    app->add_option("--run-dir,-r", c.run_dir,
                    std::string("run directory; relative names resolve under $") + kRunRootEnv);
  }
  app->add_option("--config", c.config_file, "config file applied over the run directory's config");
  app->add_option("--set", c.sets, "override a config key (key=value), repeatable");
  c.rng_seed_option = app->add_option("--rng-seed", c.rng_seed,
                                      "set split, adapter, train, swag and round seeds together");
  for (const auto& key : ConfigKeys()) {
    auto& f = c.flags.emplace_back();
    f.key = key;
    std::string name = "--" + key;
    for (char& ch : name) ch = ch == '_' ? '-' : ch;
    if (key == "warmup_epochs") name += ",--epochs";
    f.option = app->add_option(name, f.value, "config key " + key)->group("Config keys");
  }
}

fs::path ResolveRunDir(const std::string& given) {
  const char* root = std::getenv(kRunRootEnv);
  if (given.empty()) {
    if (root == nullptr || *root == '\0') {
      throw ConfigError(std::string("no run directory: pass --run-dir or set ") + kRunRootEnv);
    }
    return fs::path(root) / "default";
  }
  fs::path p(given);
  if (p.is_relative() && root != nullptr && *root != '\0') return fs::path(root) / p;
  return p;
}

void ApplyOverrides(RunConfig& cfg, const Common& c) {
  if (!c.config_file.empty()) cfg = LoadConfigFile(c.config_file, cfg);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    SetConfigValue(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.rng_seed_option != nullptr && c.rng_seed_option->count() > 0) {
    for (const char* key : {"split_seed", "adapter_seed", "train_seed", "swag_seed", "round_seed"}) {
      SetConfigValue(cfg, key, c.rng_seed);
    }
  }
  for (const auto& f : c.flags) {
    if (f.option->count() > 0) SetConfigValue(cfg, f.key, f.value);
  }
  cfg.Validate();
}

RunConfig EffectiveConfig(const RunPaths& rp, const Common& c, RunConfig base = {}) {
  if (fs::exists(rp.config())) base = LoadConfigFile(rp.config(), base);
  ApplyOverrides(base, c);
  return base;
}

void PersistConfig(const RunPaths& rp, const RunConfig& cfg) {
  WriteFileAtomic(rp.config(), "# effective configuration\n" + FormatConfig(cfg));
}

void WriteText(const fs::path& p, const std::string& text) { WriteFileAtomic(p, text); }

void WriteJson(const fs::path& p, const json& j) { WriteFileAtomic(p, j.dump(2) + "\n"); }

json ReadJson(const fs::path& p) {
  try {
    return json::parse(ReadFileBytes(p));
  } catch (const json::exception& e) {
    throw DataError("malformed json in " + p.string() + ": " + e.what());
  }
}

json SplitToJson(const SplitResult& s, const std::vector<int>& test_ids) {
  json j;
  j["seed_fraction"] = s.seed_fraction;
  j["rng_seed"] = s.rng_seed;
  j["seed_ids"] = s.seed_ids;
  j["pool_ids"] = s.pool_ids;
  j["test_ids"] = test_ids;
  return j;
}

struct SplitFile {
  SplitResult split;
  std::vector<int> test_ids;
};

SplitFile ReadSplit(const RunPaths& rp) {
  Require(rp.split(), "prepare");
  const auto j = ReadJson(rp.split());
  SplitFile s;
  try {
    s.split.seed_fraction = j.at("seed_fraction").get<double>();
    s.split.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    s.split.seed_ids = j.at("seed_ids").get<std::vector<int>>();
    s.split.pool_ids = j.at("pool_ids").get<std::vector<int>>();
    s.test_ids = j.at("test_ids").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw DataError("malformed split file: " + std::string(e.what()));
  }
  return s;
}

Manifest ReadRunManifest(const RunPaths& rp) {
  Require(rp.manifest(), "prepare");
  return LoadManifest(rp.manifest());
}

EmbeddingSet ReadRunEmbeddings(const RunPaths& rp) {
  Require(rp.embeddings(), "featurize");
  return ReadEmbeddings(rp.embeddings());
}

json CalibrationToJson(const CalibrationStage& c) {
  json j;
  j["mu_s"] = c.calibration.mu_s;
  j["sigma_s"] = c.calibration.sigma_s;
  j["mu_u"] = c.calibration.mu_u;
  j["sigma_u"] = c.calibration.sigma_u;
  j["use_u"] = c.calibration.use_u;
  j["degenerate_scores"] = c.calibration.degenerate_scores;
  j["seed_scores"] = c.seed_scores;
  j["seed_uncerts"] = c.seed_uncerts;
  return j;
}

GateCalibration ReadCalibration(const RunPaths& rp) {
  RequireCalibration(rp);
  const auto j = ReadJson(rp.calibration());
  GateCalibration c;
  try {
    c.mu_s = j.at("mu_s").get<double>();
    c.sigma_s = j.at("sigma_s").get<double>();
    c.mu_u = j.at("mu_u").get<double>();
    c.sigma_u = j.at("sigma_u").get<double>();
    c.use_u = j.at("use_u").get<bool>();
    c.degenerate_scores = j.at("degenerate_scores").get<bool>();
  } catch (const json::exception& e) {
    throw DataError("malformed calibration file: " + std::string(e.what()));
  }
  return c;
}

std::vector<int> ParseIntList(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("invalid integer list: '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<double> ParseDoubleList(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("invalid number list: '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

std::string Fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// Synthetic runs use a narrower adapter and smaller per-round budget.
RunConfig SynthDefaults() {
  RunConfig cfg;
  const auto exp = SynthExperiment::Defaults();
  cfg.out_dim = exp.pipeline.out_dim;
  cfg.proto_budget = exp.pipeline.warmup.proto_budget;
  cfg.budget = exp.rounds.budget;
  return cfg;
}

SynthExperiment ExperimentFrom(const RunConfig& cfg) {
  SynthExperiment exp;
  exp.pipeline = cfg.Pipeline();
  exp.rounds = cfg.Rounds();
  return exp;
}

void AddSynthOptions(CLI::App* app, SynthSpec& spec) {
  auto* g = "Synthetic data";
  app->add_option("--dim", spec.dim, "feature channels")->group(g);
  app->add_option("--n-seed", spec.n_seed, "seed normals")->group(g);
  app->add_option("--n-pool-normal", spec.n_pool_normal, "pool normals")->group(g);
  app->add_option("--n-pool-anomaly", spec.n_pool_anomaly, "pool anomalies")->group(g);
  app->add_option("--n-test-normal", spec.n_test_normal, "test normals")->group(g);
  app->add_option("--n-test-anomaly", spec.n_test_anomaly, "test anomalies")->group(g);
  app->add_option("--margin", spec.margin, "anomaly shift in noise_std units")->group(g);
  app->add_option("--noise-std", spec.noise_std, "normal spread")->group(g);
  app->add_option("--data-seed", spec.rng_seed, "generator seed")->group(g);
  app->add_option("--grid", spec.grid, "patch grid side")->group(g);
  app->add_option("--modes", spec.n_modes, "normal modes")->group(g);
  app->add_option("--noise-rank", spec.noise_rank, "rank of the normal variation subspace (0 = isotropic)")->group(g);
  app->add_option("--anomaly-patch-fraction", spec.anomaly_patch_fraction, "shifted patches per anomaly")->group(g);
}

// ---- stages ---------------------------------------------------------------

void CmdPrepare(const Common& c, const std::string& manifest_path) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c);
  auto manifest = LoadManifest(fs::absolute(manifest_path));
  ValidateManifest(manifest);
  auto split = SplitSeedPool(manifest, cfg.seed_fraction, cfg.split_seed);
  auto test = TestIds(manifest);
  PersistConfig(rp, cfg);
  WriteText(rp.manifest(), FormatManifestCsv(manifest));
  WriteJson(rp.split(), SplitToJson(split, test));
  std::cout << "prepared " << rp.dir.string() << ": seed " << split.seed_ids.size() << ", pool "
            << split.pool_ids.size() << ", test " << test.size() << "\n";
}

void CmdFeaturize(const Common& c, const std::string& import_path) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c);
  auto manifest = ReadRunManifest(rp);
  EmbeddingSet set;
  if (!import_path.empty()) {
    set = ReadEmbeddings(import_path);
    for (const auto& e : manifest.entries) {
      if (!set.count(e.id)) throw DataError("missing embeddings for id " + std::to_string(e.id));
    }
  } else {
    const auto bank = MakeFilterBank(cfg.Featurizer());
    const auto exec = cfg.Pipeline().exec;
    for (const auto& e : manifest.entries) {
      auto img = ResizeSquare(LoadImage(e.path, cfg.Color()), cfg.image_size);
      set[e.id] = FeaturizeBuiltin(img, bank, exec);
    }
  }
  PersistConfig(rp, cfg);
  WriteEmbeddings(set, rp.embeddings());
  std::cout << "featurized " << set.size() << " images\n";
}

void CmdWarmup(const Common& c) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c);
  const auto split = ReadSplit(rp);
  const auto set = ReadRunEmbeddings(rp);
  auto warm = RunWarmupStage(set, split.split.seed_ids, cfg.Pipeline());
  Checkpoint ck;
  ck.adapter = warm.params;
  ck.optimizer = warm.optimizer;
  ck.swag = warm.swag;
  PersistConfig(rp, cfg);
  WriteCheckpoint(ck, rp.warmup());
  json log;
  log["epoch_losses"] = warm.epoch_losses;
  log["prototypes"] = warm.prototypes.vectors.rows;
  WriteJson(rp.logs() / "warmup.json", log);
  std::cout << "warm-up done: " << warm.epoch_losses.size() << " epochs";
  if (!warm.epoch_losses.empty()) std::cout << ", final loss " << Fixed(warm.epoch_losses.back(), 6);
  std::cout << "\n";
}

void CmdCalibrate(const Common& c) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c);
  Require(rp.warmup(), "warmup");
  const auto split = ReadSplit(rp);
  const auto set = ReadRunEmbeddings(rp);
  const auto ck = ReadCheckpoint(rp.warmup());
  auto cal = RunCalibrationStage(set, split.split.seed_ids, ck.adapter, ck.swag, cfg.Pipeline());
  PersistConfig(rp, cfg);
  WriteJson(rp.calibration(), CalibrationToJson(cal));
  if (cal.calibration.degenerate_scores) {
    std::cerr << "warning: seed scores have zero spread; sigma_s floored at 1e-12\n";
  }
  std::cout << "calibrated: mu_s " << cal.calibration.mu_s << ", sigma_s " << cal.calibration.sigma_s
            << ", use_u " << (cal.calibration.use_u ? "true" : "false") << "\n";
}

void CmdRounds(const Common& c, bool resume) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c);
  RequireCalibration(rp);
  Require(rp.warmup(), "warmup");
  const auto calib = ReadCalibration(rp);
  const auto manifest = ReadRunManifest(rp);
  const auto split = ReadSplit(rp);
  const auto set = ReadRunEmbeddings(rp);
  const auto warm = ReadCheckpoint(rp.warmup());
  if (cfg.rank_mode == "uncert" && !calib.use_u) {
    std::cerr << "warning: uncertainty gate is off; rank_mode=uncert degenerates to id order, "
                 "consider rank_mode=boundary\n";
  }

  RoundInputs in;
  in.features = &set;
  in.seed_ids = split.split.seed_ids;
  in.pool_ids = split.split.pool_ids;
  for (const auto& e : manifest.entries) in.labels[e.id] = e.label;

  std::optional<RoundResume> from;
  if (resume && fs::exists(rp.last()) && fs::exists(rp.best())) {
    RoundResume r{ReadCheckpoint(rp.last()), ReadCheckpoint(rp.best())};
    if (r.last.state.round_index > 0) from = std::move(r);
  }
  if (!from) {
    std::error_code ec;
    fs::remove_all(rp.logs() / "rounds", ec);
    fs::remove(rp.logs() / "rounds.jsonl", ec);
    for (const auto& entry : fs::directory_iterator(rp.logs(), ec)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("round_", 0) == 0) fs::remove(entry.path(), ec);
    }
  }
  fs::create_directories(rp.logs());
  std::ofstream jsonl(rp.logs() / "rounds.jsonl", std::ios::app);

  RoundSink sink;
  sink.on_gates = [&](const std::vector<GateLogRow>& rows) {
    if (rows.empty()) return;
    std::string text = GateLogHeader();
    for (const auto& r : rows) text += FormatGateLogRow(r);
    WriteText(rp.logs() / ("round_" + std::to_string(rows.front().round) + "_gates.csv"), text);
  };
  sink.on_round = [&](const RoundRecord& r) {
    json j;
    j["round"] = r.round;
    j["scored"] = r.scored;
    j["safe"] = r.safe;
    j["tau"] = r.tau_used;
    j["selected"] = r.selected;
    j["admitted"] = r.admitted;
    j["admitted_anomalies"] = r.admitted_anomalies;
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["memory_size"] = r.memory_size;
    j["fine_tuned"] = r.fine_tuned;
    j["metric"] = r.metric;
    j["improved"] = r.improved;
    if (!r.note.empty()) j["note"] = r.note;
    jsonl << j.dump() << "\n";
    jsonl.flush();
    std::cout << "round " << r.round << ": scored " << r.scored << ", safe " << r.safe << ", admitted "
              << r.admitted.size() << " (tau " << r.tau_used << ")"
              << (r.note.empty() ? "" : ", " + r.note) << "\n";
  };
  sink.on_last = [&](const Checkpoint& ck) { WriteCheckpoint(ck, rp.last()); };
  sink.on_best = [&](const Checkpoint& ck) { WriteCheckpoint(ck, rp.best()); };

  RoundStart start{warm.adapter, warm.optimizer, warm.swag};
  auto result = RunRounds(in, start, calib, cfg.Rounds(), cfg.Pipeline(), sink, from);
  PersistConfig(rp, cfg);

  Checkpoint fin;
  fin.adapter = result.adapter;
  fin.optimizer = result.optimizer;
  fin.swag = result.swag;
  fin.state = result.state;
  fin.memory = result.memory;
  WriteCheckpoint(fin, rp.final_state());
  WriteText(rp.report() / "contamination.csv", result.report.Csv());
  std::cout << "rounds done: accepted " << result.state.accepted.size() << ", memory "
            << result.memory.size() << " rows, best round " << result.state.best_round << "\n";
}

void CmdEval(const Common& c) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c);
  Require(rp.final_state(), "rounds");
  const auto manifest = ReadRunManifest(rp);
  const auto split = ReadSplit(rp);
  const auto set = ReadRunEmbeddings(rp);
  const auto fin = ReadCheckpoint(rp.final_state());
  if (!fin.memory) throw DataError("final checkpoint holds no memory bank");
  if (split.test_ids.empty()) throw DataError("no test entries in the manifest");
  std::vector<int> labels;
  for (int id : split.test_ids) labels.push_back(manifest.label(id));
  const auto pipe = cfg.Pipeline();
  auto ev = RunEvalStage(set, split.test_ids, labels, fin.adapter, *fin.memory, pipe.score, pipe.exec);

  PersistConfig(rp, cfg);
  auto j = ReportToJson(ev.report);
  j["memory_size"] = fin.memory->size();
  j["accepted"] = fin.state.accepted.size();
  WriteJson(rp.report() / "eval.json", j);
  if (!ev.report.roc_points.empty()) WriteText(rp.report() / "roc.csv", CurveCsv(ev.report.roc_points, "fpr", "tpr"));
  if (!ev.report.pr_points.empty()) WriteText(rp.report() / "pr.csv", CurveCsv(ev.report.pr_points, "recall", "precision"));
  {
    std::ostringstream os;
    os.precision(17);
    os << "id,label,score\n";
    for (std::size_t i = 0; i < ev.ids.size(); ++i) os << ev.ids[i] << ',' << ev.labels[i] << ',' << ev.scores[i] << '\n';
    WriteText(rp.report() / "scores.csv", os.str());
  }
  if (cfg.heatmaps > 0) {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.heatmaps), split.test_ids.size());
    std::vector<int> ids(split.test_ids.begin(), split.test_ids.begin() + static_cast<std::ptrdiff_t>(n));
    const BankIndex index(*fin.memory, pipe.exec);
    const auto full = ScoreIdsFull(set, ids, fin.adapter, index, pipe.score, pipe.exec);
    for (std::size_t i = 0; i < n; ++i) {
      WriteHeatmap(RenderHeatmap(full[i], cfg.image_size, cfg.image_size),
                   rp.report() / "heatmaps" / (std::to_string(ids[i]) + ".bin"));
    }
  }
  if (ev.report.roc_auc) {
    std::cout << "roc_auc " << Fixed(*ev.report.roc_auc) << ", pr_auc " << Fixed(*ev.report.pr_auc) << "\n";
  } else {
    std::cout << "test labels contain a single class; thresholded metrics skipped\n";
  }
}

// ---- simulate -------------------------------------------------------------

void CmdSimGenerate(const Common& c, const SynthSpec& spec) {
  RunPaths rp{ResolveRunDir(c.run_dir)};
  RunLock lock(rp.dir);
  auto cfg = EffectiveConfig(rp, c, SynthDefaults());
  const auto data = Generate(spec);
  cfg.seed_fraction = data.split.seed_fraction;
  PersistConfig(rp, cfg);
  WriteText(rp.manifest(), FormatManifestCsv(data.manifest));
  WriteJson(rp.split(), SplitToJson(data.split, data.test_ids));
  WriteEmbeddings(data.embeddings, rp.embeddings());
  std::cout << "generated " << data.manifest.size() << " synthetic images in " << rp.dir.string() << "\n";
}

void CmdSimTheorem1(const Common& c, SynthSpec spec, const std::string& margins,
                    const std::string& seeds, const std::string& out) {
  RunConfig cfg = SynthDefaults();
  ApplyOverrides(cfg, c);
  auto exp = ExperimentFrom(cfg);
  std::ostringstream csv;
  csv << "margin,seed,round,admitted,admitted_anomalies,alpha,beta\n";
  for (double m : ParseDoubleList(margins)) {
    for (int s : ParseIntList(seeds)) {
      spec.margin = m;
      spec.rng_seed = static_cast<std::uint64_t>(s);
      auto report = VerifyTheorem1(spec, exp);
      std::size_t admitted = 0;
      for (const auto& r : report.rounds) {
        admitted += r.admitted.size();
        csv << m << ',' << s << ',' << r.round << ',' << r.admitted.size() << ',' << r.admitted_anomalies
            << ',' << r.alpha << ',' << r.beta << '\n';
      }
      std::cout << "margin " << m << " seed " << s << ": alpha 0, admitted normals " << admitted << "\n";
    }
  }
  if (!out.empty()) WriteText(out, csv.str());
}

void CmdSimProp1(const Common& c, const SynthSpec& spec, const std::string& margins,
                 const std::string& ks, const std::string& seeds, const std::string& out) {
  RunConfig cfg = SynthDefaults();
  ApplyOverrides(cfg, c);
  std::vector<std::uint64_t> seed_list;
  for (int s : ParseIntList(seeds)) seed_list.push_back(static_cast<std::uint64_t>(s));
  auto rows = SweepProp1(spec, ParseDoubleList(margins), ParseIntList(ks), seed_list, ExperimentFrom(cfg));
  const auto csv = SweepCsv(rows);
  if (out.empty()) std::cout << csv;
  else WriteText(out, csv);
  const auto t = CheckTrend(rows);
  for (std::size_t i = 0; i < t.margins.size(); ++i) {
    std::cerr << "margin " << t.margins[i] << ": mean alpha " << Fixed(t.mean_alpha[i])
              << ", mean beta " << Fixed(t.mean_beta[i]) << "\n";
  }
  std::cerr << "inversions " << t.inversions << "\n";
}

void CmdSimCompare(const Common& c, SynthSpec spec, const std::string& seeds) {
  RunConfig cfg = SynthDefaults();
  ApplyOverrides(cfg, c);
  double base = 0.0, prop = 0.0;
  const auto list = ParseIntList(seeds);
  for (int s : list) {
    spec.rng_seed = static_cast<std::uint64_t>(s);
    RunConfig per = cfg;
    per.adapter_seed = per.swag_seed = per.train_seed = per.round_seed = static_cast<std::uint64_t>(s);
    auto cmp = CompareWithBaseline(spec, ExperimentFrom(per));
    std::cout << "seed " << s << ": baseline " << Fixed(cmp.baseline_auc) << ", proposed "
              << Fixed(cmp.proposed_auc) << "\n";
    base += cmp.baseline_auc;
    prop += cmp.proposed_auc;
  }
  const double n = static_cast<double>(list.size());
  std::cout << "mean: baseline " << Fixed(base / n) << ", proposed " << Fixed(prop / n) << ", gain "
            << Fixed((prop - base) / n) << "\n";
}

void CmdAggregate(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<json> reports;
  for (const auto& p : inputs) reports.push_back(ReadJson(p));
  json j;
  for (const auto& [key, s] : AggregateReports(reports)) {
    j[key] = {{"n", s.n}, {"mean", s.mean}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
  }
  if (out.empty()) std::cout << j.dump(2) << "\n";
  else WriteJson(out, j);
}

int ExitCodeFor(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConfig: return kExitConfig;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumeric: return kExitNumeric;
  }
  return kExitInternal;
}

}  // namespace

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"incanom: seed-anchored incremental anomaly detection"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  Common prep_c, feat_c, warm_c, cal_c, rounds_c, eval_c, gen_c, thm_c, prop_c, cmp_c;
  std::string manifest_path, import_path, thm_margins = "0,2,4", thm_seeds = "123,124,125,126,127",
                                          thm_out, prop_margins = "0,1,2,3,4", prop_k = "4",
                                          prop_seeds = "123,124,125,126,127", prop_out,
                                          cmp_seeds = "123,124,125,126,127", agg_out;
  std::vector<std::string> agg_inputs;
  bool resume = false;
  SynthSpec gen_spec, thm_spec, prop_spec, cmp_spec;
  cmp_spec.n_seed = 200;
  cmp_spec.n_pool_normal = 600;
  cmp_spec.n_pool_anomaly = 200;
  cmp_spec.n_test_normal = 200;
  cmp_spec.n_test_anomaly = 200;
  cmp_spec.margin = 2.0;

  auto* prepare = app.add_subcommand("prepare", "load a manifest and split seed/pool");
  AddCommon(prepare, prep_c);
  prepare->add_option("--manifest,-m", manifest_path, "CSV or JSON manifest")->required();

  auto* featurize = app.add_subcommand("featurize", "compute or import multi-scale features");
  AddCommon(featurize, feat_c);
  featurize->add_option("--embeddings", import_path, "import an embedding file instead of featurizing");

  auto* warmup = app.add_subcommand("warmup", "warm up the adapter on the seed set");
  AddCommon(warmup, warm_c);
  auto* calibrate = app.add_subcommand("calibrate", "calibrate the z-score gates on the seed set");
  AddCommon(calibrate, cal_c);
  auto* rounds = app.add_subcommand("rounds", "run the incremental admission rounds");
  AddCommon(rounds, rounds_c);
  rounds->add_flag("--resume", resume, "continue from checkpoints/last.bin");
  auto* eval = app.add_subcommand("eval", "evaluate on the held-out test entries");
  AddCommon(eval, eval_c);

  auto* simulate = app.add_subcommand("simulate", "synthetic experiments");
  simulate->require_subcommand(1);
  auto* gen = simulate->add_subcommand("generate", "write a synthetic run directory");
  AddCommon(gen, gen_c);
  AddSynthOptions(gen, gen_spec);
  auto* thm = simulate->add_subcommand("theorem1", "strict-mode contamination check over a grid");
  AddCommon(thm, thm_c, false);
  AddSynthOptions(thm, thm_spec);
  thm->add_option("--margins", thm_margins, "comma-separated margins");
  thm->add_option("--seeds", thm_seeds, "comma-separated seeds");
  thm->add_option("--out", thm_out, "per-round CSV output");
  auto* prop = simulate->add_subcommand("prop1", "oracle-free admission sweep");
  AddCommon(prop, prop_c, false);
  AddSynthOptions(prop, prop_spec);
  prop->add_option("--margins", prop_margins, "comma-separated margins");
  prop->add_option("--k-values", prop_k, "comma-separated SWAG sample counts");
  prop->add_option("--seeds", prop_seeds, "comma-separated seeds");
  prop->add_option("--out", prop_out, "sweep CSV output (default stdout)");
  auto* cmp = simulate->add_subcommand("compare", "proposed pipeline against the ungated baseline");
  AddCommon(cmp, cmp_c, false);
  AddSynthOptions(cmp, cmp_spec);
  cmp->add_option("--seeds", cmp_seeds, "comma-separated seeds");

  auto* aggregate = app.add_subcommand("aggregate", "mean and 95% CI over eval.json files");
  aggregate->add_option("inputs", agg_inputs, "eval.json files")->required();
  aggregate->add_option("--out", agg_out, "output json (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (prepare->parsed()) CmdPrepare(prep_c, manifest_path);
    else if (featurize->parsed()) CmdFeaturize(feat_c, import_path);
    else if (warmup->parsed()) CmdWarmup(warm_c);
    else if (calibrate->parsed()) CmdCalibrate(cal_c);
    else if (rounds->parsed()) CmdRounds(rounds_c, resume);
    else if (eval->parsed()) CmdEval(eval_c);
    else if (gen->parsed()) CmdSimGenerate(gen_c, gen_spec);
    else if (thm->parsed()) CmdSimTheorem1(thm_c, thm_spec, thm_margins, thm_seeds, thm_out);
    else if (prop->parsed()) CmdSimProp1(prop_c, prop_spec, prop_margins, prop_k, prop_seeds, prop_out);
    else if (cmp->parsed()) CmdSimCompare(cmp_c, cmp_spec, cmp_seeds);
    else if (aggregate->parsed()) CmdAggregate(agg_inputs, agg_out);
  } catch (const LockBusy& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBusy;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"incanom"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace incanom
