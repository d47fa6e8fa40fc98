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

#include "incanom/embedding_file.hpp"

#include "incanom/binary_io.hpp"

namespace incanom {

std::string EncodeEmbeddings(const EmbeddingSet& set) {
  BinaryWriter w;
  w.Bytes(std::string_view(kEmbeddingMagic, 4));
  w.U16(kEmbeddingVersion);
  w.U32(static_cast<std::uint32_t>(set.size()));
  for (const auto& [id, feats] : set) {
    if (id < 0) throw DataError("embedding ids must be non-negative");
    w.U32(static_cast<std::uint32_t>(id));
    w.U32(static_cast<std::uint32_t>(feats.scales.size()));
    for (const auto& s : feats.scales) {
      if (s.data.size() != s.size()) throw DataError("feature payload does not match its shape");
      w.U32(static_cast<std::uint32_t>(s.channels));
      w.U32(static_cast<std::uint32_t>(s.height));
      w.U32(static_cast<std::uint32_t>(s.width));
    }
    for (const auto& s : feats.scales) {
      for (float v : s.data) w.F32(v);
    }
  }
  return w.data();
}

EmbeddingSet DecodeEmbeddings(std::string bytes) {
  BinaryReader r(std::move(bytes));
  if (r.remaining() < 4) throw FormatError(FormatFault::kTruncated, "truncated header");
  if (r.Bytes(4) != std::string_view(kEmbeddingMagic, 4)) {
    throw FormatError(FormatFault::kBadMagic, "bad magic: not an embedding file");
  }
  std::uint16_t version = r.U16();
  if (version != kEmbeddingVersion) {
    throw FormatError(FormatFault::kVersionMismatch,
                      "version mismatch: embedding file v" + std::to_string(version));
  }
  std::uint32_t count = r.U32();
  EmbeddingSet set;
  for (std::uint32_t i = 0; i < count; ++i) {
    int id = static_cast<int>(r.U32());
    std::uint32_t n_scales = r.U32();
    if (n_scales == 0 || n_scales > 64) throw FormatError(FormatFault::kCorrupt, "bad scale count");
    MultiScaleFeatures f;
    f.scales.resize(n_scales);
    for (auto& s : f.scales) {
      s.channels = static_cast<int>(r.U32());
      s.height = static_cast<int>(r.U32());
      s.width = static_cast<int>(r.U32());
      if (s.channels < 1 || s.height < 1 || s.width < 1) {
        throw FormatError(FormatFault::kCorrupt, "bad scale shape");
      }
    }
    for (auto& s : f.scales) {
      if (r.remaining() / 4 < s.size()) throw FormatError(FormatFault::kTruncated, "truncated payload");
      s.data.resize(s.size());
      for (auto& v : s.data) v = r.F32();
    }
    if (!set.emplace(id, std::move(f)).second) {
      throw FormatError(FormatFault::kCorrupt, "duplicate record id " + std::to_string(id));
    }
  }
  if (!r.at_end()) throw FormatError(FormatFault::kCorrupt, "trailing bytes after last record");
  return set;
}

void WriteEmbeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeEmbeddings(set));
}

EmbeddingSet ReadEmbeddings(const std::filesystem::path& path) {
  return DecodeEmbeddings(ReadFileBytes(path));
}

}  // namespace incanom
