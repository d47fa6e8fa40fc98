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

#include "incanom/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "incanom/binary_io.hpp"
#include "incanom/resize.hpp"
#include "json.hpp"

namespace incanom {
namespace {

std::string Trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string Upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

int ParseLabel(const std::string& raw) {
  std::string v = Upper(Trim(raw));
  if (v == "NORMAL" || v == "0") return 0;
  if (v == "ANOMALY" || v == "1") return 1;
  throw DataError("invalid label '" + raw + "'");
}

Split ParseSplit(const std::string& raw) {
  std::string v = Upper(Trim(raw));
  if (v.empty() || v == "TRAIN") return Split::kTrain;
  if (v == "TEST") return Split::kTest;
  throw DataError("invalid split '" + raw + "'");
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Manifest ParseCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!Trim(line).empty()) {
      header = SplitCsvLine(Trim(line));
      break;
    }
  }
  int path_col = -1, label_col = -1, split_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string h = Trim(header[i]);
    if (h == "path") path_col = static_cast<int>(i);
    if (h == "label") label_col = static_cast<int>(i);
    if (h == "split") split_col = static_cast<int>(i);
  }
  if (path_col < 0 || label_col < 0) throw DataError("manifest header must contain path,label");
  Manifest m;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    auto cols = SplitCsvLine(Trim(line));
    auto need = static_cast<std::size_t>(std::max({path_col, label_col, split_col}));
    if (cols.size() <= need) throw DataError("manifest row has too few columns: " + line);
    ManifestEntry e;
    e.path = Trim(cols[static_cast<std::size_t>(path_col)]);
    e.label = ParseLabel(cols[static_cast<std::size_t>(label_col)]);
    if (split_col >= 0) e.split = ParseSplit(cols[static_cast<std::size_t>(split_col)]);
    e.id = static_cast<int>(m.entries.size());
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest ParseJson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest json: ") + e.what());
  }
  if (!doc.is_array()) throw DataError("manifest json must be an array");
  Manifest m;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("path") || !item.contains("label")) {
      throw DataError("manifest json entries need path and label");
    }
    ManifestEntry e;
    e.path = item.at("path").get<std::string>();
    const auto& lab = item.at("label");
    e.label = lab.is_number_integer() ? ParseLabel(std::to_string(lab.get<int>()))
                                      : ParseLabel(lab.get<std::string>());
    if (item.contains("split")) e.split = ParseSplit(item.at("split").get<std::string>());
    e.id = static_cast<int>(m.entries.size());
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace

Manifest ParseManifest(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw DataError("empty manifest");
  Manifest m = text[first] == '[' ? ParseJson(text) : ParseCsv(text);
  ValidateManifest(m);
  return m;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  Manifest m = ParseManifest(ReadFileBytes(path));
  // Relative image paths resolve against the manifest's directory.
  for (auto& e : m.entries) {
    std::filesystem::path p(e.path);
    if (p.is_relative() && e.path.find("://") == std::string::npos && path.has_parent_path()) {
      e.path = (path.parent_path() / p).lexically_normal().string();
    }
  }
  return m;
}

std::string FormatManifestCsv(const Manifest& m) {
  std::ostringstream os;
  os << "path,label,split\n";
  for (const auto& e : m.entries) {
    std::string p = e.path;
    bool quote = p.find_first_of(",\"") != std::string::npos;
    if (quote) {
      std::string q = "\"";
      for (char c : p) {
        if (c == '"') q += "\"\"";
        else q.push_back(c);
      }
      p = q + "\"";
    }
    os << p << ',' << e.label << ',' << (e.split == Split::kTest ? "test" : "train") << '\n';
  }
  return os.str();
}

void ValidateManifest(const Manifest& m) {
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    if (e.id != static_cast<int>(i)) throw DataError("manifest ids must be dense 0..N-1");
    if (e.label != 0 && e.label != 1) throw DataError("manifest label out of range");
  }
}

SplitResult SplitSeedPool(const Manifest& manifest, double seed_fraction, std::uint64_t rng_seed) {
  if (!(seed_fraction > 0.0 && seed_fraction <= 1.0)) throw ConfigError("invalid fraction");
  std::vector<int> normals;
  std::vector<int> anomalies;
  for (const auto& e : manifest.entries) {
    if (e.split != Split::kTrain) continue;
    (e.label == 0 ? normals : anomalies).push_back(e.id);
  }
  if (normals.empty()) throw DataError("empty normal class");

  Rng rng(rng_seed);
  rng.Shuffle(normals);
  std::size_t n = std::max<std::size_t>(
      1, RoundHalfUp(seed_fraction * static_cast<double>(normals.size())));
  n = std::min(n, normals.size());

  SplitResult out;
  out.seed_fraction = seed_fraction;
  out.rng_seed = rng_seed;
  out.seed_ids.assign(normals.begin(), normals.begin() + static_cast<std::ptrdiff_t>(n));
  out.pool_ids.assign(normals.begin() + static_cast<std::ptrdiff_t>(n), normals.end());
  out.pool_ids.insert(out.pool_ids.end(), anomalies.begin(), anomalies.end());
  std::sort(out.seed_ids.begin(), out.seed_ids.end());
  std::sort(out.pool_ids.begin(), out.pool_ids.end());
  return out;
}

std::vector<int> TestIds(const Manifest& manifest) {
  std::vector<int> ids;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::kTest) ids.push_back(e.id);
  }
  return ids;
}

Image ParsePnm(const std::string& bytes, ColorMode mode) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_ws();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw DataError("malformed netpbm header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1L << 30)) throw DataError("netpbm value out of range");
      ++pos;
    }
    return static_cast<int>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P') throw DataError("unsupported image format");
  char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw DataError("unsupported image format");
  }
  pos = 2;
  int width = read_int();
  int height = read_int();
  int maxval = read_int();
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw DataError("bad netpbm header");
  const int src_channels = (kind == '3' || kind == '6') ? 3 : 1;
  const bool binary = kind == '5' || kind == '6';
  const std::size_t count = static_cast<std::size_t>(width) * height * src_channels;
  std::vector<float> interleaved(count);
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bps = maxval < 256 ? 1 : 2;
    if (bytes.size() < pos + count * bps) throw DataError("truncated netpbm payload");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = static_cast<unsigned char>(bytes[pos + i * bps]);
      if (bps == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + i * bps + 1]);
      interleaved[i] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      interleaved[i] = static_cast<float>(read_int()) / static_cast<float>(maxval);
    }
  }
  for (float& v : interleaved) v = std::clamp(v, 0.0f, 1.0f);

  Image img;
  img.height = height;
  img.width = width;
  img.channels = mode == ColorMode::kRgb ? 3 : 1;
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  img.data.assign(plane * img.channels, 0.0f);
  for (std::size_t p = 0; p < plane; ++p) {
    if (src_channels == 1) {
      for (int c = 0; c < img.channels; ++c) img.data[c * plane + p] = interleaved[p];
    } else if (mode == ColorMode::kRgb) {
      for (int c = 0; c < 3; ++c) img.data[c * plane + p] = interleaved[p * 3 + c];
    } else {
      img.data[p] = 0.299f * interleaved[p * 3] + 0.587f * interleaved[p * 3 + 1] +
                    0.114f * interleaved[p * 3 + 2];
    }
  }
  return img;
}

Image LoadImage(const std::filesystem::path& path, ColorMode mode) {
  return ParsePnm(ReadFileBytes(path), mode);
}

Image ResizeSquare(const Image& img, int size) {
  if (size < 1) throw ConfigError("image size must be positive");
  Image out;
  out.channels = img.channels;
  out.height = size;
  out.width = size;
  out.data.assign(static_cast<std::size_t>(size) * size * img.channels, 0.0f);
  ResizeBilinear(img.data.data(), img.channels, img.height, img.width, out.data.data(), size, size);
  return out;
}

}  // namespace incanom
