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

#include "incanom/checkpoint.hpp"

#include "incanom/binary_io.hpp"

namespace incanom {
namespace {

void PutDoubles(BinaryWriter& w, const std::vector<double>& v) {
  w.U64(v.size());
  for (double x : v) w.F64(x);
}

void PutInts(BinaryWriter& w, const std::vector<int>& v) {
  w.U64(v.size());
  for (int x : v) w.U32(static_cast<std::uint32_t>(x));
}

std::size_t CheckedCount(BinaryReader& r, std::size_t elem_size) {
  std::uint64_t n = r.U64();
  if (n > r.remaining() / elem_size) throw FormatError(FormatFault::kTruncated, "truncated payload");
  return static_cast<std::size_t>(n);
}

std::vector<double> GetDoubles(BinaryReader& r) {
  std::vector<double> v(CheckedCount(r, 8));
  for (double& x : v) x = r.F64();
  return v;
}

std::vector<int> GetInts(BinaryReader& r) {
  std::vector<int> v(CheckedCount(r, 4));
  for (int& x : v) x = static_cast<int>(r.U32());
  return v;
}

void PutAdapter(BinaryWriter& w, const AdapterParams& p) {
  w.U32(static_cast<std::uint32_t>(p.out_dim));
  w.F64(p.norm_momentum);
  w.F64(p.norm_eps);
  w.U32(static_cast<std::uint32_t>(p.scales.size()));
  for (const auto& s : p.scales) {
    w.U32(static_cast<std::uint32_t>(s.in_channels));
    w.U32(static_cast<std::uint32_t>(s.out_dim));
    PutDoubles(w, s.weight);
    PutDoubles(w, s.bias);
    PutDoubles(w, s.norm_scale);
    PutDoubles(w, s.norm_shift);
    PutDoubles(w, s.running_mean);
    PutDoubles(w, s.running_var);
  }
}

AdapterParams GetAdapter(BinaryReader& r) {
  AdapterParams p;
  p.out_dim = static_cast<int>(r.U32());
  p.norm_momentum = r.F64();
  p.norm_eps = r.F64();
  std::uint32_t n = r.U32();
  if (n > 64) throw FormatError(FormatFault::kCorrupt, "corrupt adapter: scale count");
  for (std::uint32_t i = 0; i < n; ++i) {
    ScaleParams s;
    s.in_channels = static_cast<int>(r.U32());
    s.out_dim = static_cast<int>(r.U32());
    s.weight = GetDoubles(r);
    s.bias = GetDoubles(r);
    s.norm_scale = GetDoubles(r);
    s.norm_shift = GetDoubles(r);
    s.running_mean = GetDoubles(r);
    s.running_var = GetDoubles(r);
    const auto out = static_cast<std::size_t>(s.out_dim);
    if (s.out_dim != p.out_dim ||
        s.weight.size() != out * static_cast<std::size_t>(s.in_channels) || s.bias.size() != out ||
        s.norm_scale.size() != out || s.norm_shift.size() != out || s.running_mean.size() != out ||
        s.running_var.size() != out) {
      throw FormatError(FormatFault::kCorrupt, "corrupt adapter: shape mismatch");
    }
    p.scales.push_back(std::move(s));
  }
  return p;
}

}  // namespace

std::string EncodeCheckpoint(const Checkpoint& ck) {
  BinaryWriter w;
  w.Bytes(std::string_view(kCheckpointMagic, 4));
  w.U16(kCheckpointVersion);
  PutAdapter(w, ck.adapter);

  PutDoubles(w, ck.optimizer.m);
  PutDoubles(w, ck.optimizer.v);
  w.U64(static_cast<std::uint64_t>(ck.optimizer.step));
  w.F64(ck.optimizer.lr);
  w.F64(ck.optimizer.beta1);
  w.F64(ck.optimizer.beta2);
  w.F64(ck.optimizer.eps);

  PutDoubles(w, ck.swag.mean);
  PutDoubles(w, ck.swag.sq_mean);
  w.U64(static_cast<std::uint64_t>(ck.swag.snapshot_count));
  w.F64(ck.swag.noise_scale);

  PutInts(w, ck.state.used);
  PutInts(w, ck.state.accepted);
  w.U32(static_cast<std::uint32_t>(ck.state.round_index));
  w.F64(ck.state.best_metric);
  w.U32(static_cast<std::uint32_t>(ck.state.best_round));
  w.F64(ck.state.tau);

  w.String(ck.rng_state);

  w.U8(ck.memory ? 1 : 0);
  if (ck.memory) {
    const auto& m = *ck.memory;
    w.U64(m.vectors.rows);
    w.U64(m.vectors.cols);
    for (float x : m.vectors.data) w.F32(x);
    PutInts(w, m.source_ids);
    w.U8(m.built_from == MemorySource::kSeed ? 0 : 1);
    w.F64(m.coreset_ratio);
  }
  return w.data();
}

Checkpoint DecodeCheckpoint(std::string bytes) {
  BinaryReader r(std::move(bytes));
  if (r.remaining() < 4) throw FormatError(FormatFault::kTruncated, "truncated header");
  if (r.Bytes(4) != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError(FormatFault::kBadMagic, "bad magic: not a checkpoint file");
  }
  std::uint16_t version = r.U16();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatFault::kVersionMismatch,
                      "version mismatch: checkpoint v" + std::to_string(version));
  }
  Checkpoint ck;
  ck.adapter = GetAdapter(r);

  ck.optimizer.m = GetDoubles(r);
  ck.optimizer.v = GetDoubles(r);
  ck.optimizer.step = static_cast<std::int64_t>(r.U64());
  ck.optimizer.lr = r.F64();
  ck.optimizer.beta1 = r.F64();
  ck.optimizer.beta2 = r.F64();
  ck.optimizer.eps = r.F64();

  ck.swag.mean = GetDoubles(r);
  ck.swag.sq_mean = GetDoubles(r);
  ck.swag.snapshot_count = static_cast<std::int64_t>(r.U64());
  ck.swag.noise_scale = r.F64();

  ck.state.used = GetInts(r);
  ck.state.accepted = GetInts(r);
  ck.state.round_index = static_cast<int>(r.U32());
  ck.state.best_metric = r.F64();
  ck.state.best_round = static_cast<int>(r.U32());
  ck.state.tau = r.F64();

  ck.rng_state = r.String();

  std::uint8_t has_memory = r.U8();
  if (has_memory > 1) throw FormatError(FormatFault::kCorrupt, "corrupt checkpoint: memory flag");
  if (has_memory) {
    MemoryBank m;
    std::uint64_t rows = r.U64();
    std::uint64_t cols = r.U64();
    if (cols != 0 && rows > r.remaining() / 4 / cols) {
      throw FormatError(FormatFault::kTruncated, "truncated payload");
    }
    m.vectors = Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (float& x : m.vectors.data) x = r.F32();
    m.source_ids = GetInts(r);
    if (m.source_ids.size() != m.vectors.rows) {
      throw FormatError(FormatFault::kCorrupt, "corrupt checkpoint: memory ids");
    }
    m.built_from = r.U8() == 0 ? MemorySource::kSeed : MemorySource::kSeedAndAccepted;
    m.coreset_ratio = r.F64();
    ck.memory = std::move(m);
  }
  if (!r.at_end()) throw FormatError(FormatFault::kCorrupt, "corrupt checkpoint: trailing bytes");

  const std::size_t n = TrainableCount(ck.adapter);
  if ((!ck.optimizer.m.empty() && (ck.optimizer.m.size() != n || ck.optimizer.v.size() != n)) ||
      (!ck.swag.mean.empty() && (ck.swag.mean.size() != n || ck.swag.sq_mean.size() != n))) {
    throw FormatError(FormatFault::kCorrupt, "corrupt checkpoint: state size mismatch");
  }
  return ck;
}

void WriteCheckpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeCheckpoint(ck));
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace incanom
