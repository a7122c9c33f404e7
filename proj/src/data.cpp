// Copyright 2026 The asckit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asc/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "asc/csv.hpp"
#include "asc/error.hpp"

namespace asc {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'C', 'F'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 14;

const std::vector<std::string> kManifestColumns = {
    "segment_id", "recording_id", "location_id", "scene_label", "feature_path"};

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw ShapeError("feature matrix must be at least 1x1");
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw ShapeError("feature matrix must be at least 1x1");
  if (values_.size() != rows * cols) {
    throw ShapeError("feature matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " given " + std::to_string(values_.size()) + " values");
  }
}

void require_finite(const FeatureMatrix& m) {
  const auto& v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw RangeError("non-finite feature value at row " + std::to_string(i / m.cols()) +
                       ", col " + std::to_string(i % m.cols()));
    }
  }
}

Dataset::Dataset(std::vector<Segment> segments) : segments_(std::move(segments)) {
  std::unordered_set<std::string> ids;
  std::set<std::string> labels;
  for (const auto& s : segments_) {
    if (!ids.insert(s.segment_id).second) {
      throw Error("duplicate segment_id '" + s.segment_id + "'");
    }
    if (s.label) labels.insert(*s.label);
  }
  vocabulary_.assign(labels.begin(), labels.end());
}

std::size_t Dataset::class_index(const std::string& label) const {
  auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), label);
  if (it == vocabulary_.end() || *it != label) {
    throw RangeError("label '" + label + "' not in vocabulary");
  }
  return static_cast<std::size_t>(it - vocabulary_.begin());
}

FeatureMatrix parse_feature_matrix(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic, expected \"ASCF\"", 0);
  }
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated header", bytes.size());
  const std::uint16_t version =
      static_cast<std::uint16_t>(bytes[4] | static_cast<unsigned>(bytes[5]) << 8);
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const std::uint32_t rows = load_u32(bytes.data() + 6);
  const std::uint32_t cols = load_u32(bytes.data() + 10);
  if (rows == 0) throw FormatError("rows must be >= 1", 6);
  if (cols == 0) throw FormatError("cols must be >= 1", 10);

  const std::uint64_t count = std::uint64_t{rows} * cols;
  const std::uint64_t expected = kHeaderBytes + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload: expected " + std::to_string(expected) +
                          " bytes, file has " + std::to_string(bytes.size()),
                      bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes after payload", expected);
  }

  std::vector<double> values(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = kHeaderBytes + 4 * i;
    const float f = std::bit_cast<float>(load_u32(bytes.data() + offset));
    if (!std::isfinite(f)) throw FormatError("non-finite value", offset);
    values[i] = f;
  }
  return FeatureMatrix(rows, cols, std::move(values));
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return parse_feature_matrix(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

std::vector<unsigned char> encode_feature_matrix(const FeatureMatrix& m) {
  require_finite(m);
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("feature matrix dimensions exceed 32 bits");
  }
  std::vector<unsigned char> out(kMagic, kMagic + 4);
  out.push_back(static_cast<unsigned char>(kVersion & 0xff));
  out.push_back(static_cast<unsigned char>(kVersion >> 8));
  store_u32(out, static_cast<std::uint32_t>(m.rows()));
  store_u32(out, static_cast<std::uint32_t>(m.cols()));
  out.reserve(out.size() + 4 * m.size());
  for (double v : m.values()) {
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) throw RangeError("feature value overflows float32");
    store_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  // Encode first so that an invalid matrix leaves nothing on disk.
  const auto bytes = encode_feature_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_manifest(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  for (const auto& name : table.header) {
    if (std::find(kManifestColumns.begin(), kManifestColumns.end(), name) ==
        kManifestColumns.end()) {
      throw Error(path.string() + ": unknown column '" + name + "'");
    }
  }
  std::vector<std::size_t> idx;
  for (const auto& name : kManifestColumns) {
    const auto c = table.column(name);
    if (c == std::string::npos) {
      throw Error(path.string() + ": missing required column '" + name + "'");
    }
    idx.push_back(c);
  }
  if (table.header.size() != kManifestColumns.size()) {
    throw Error(path.string() + ": duplicate column in header");
  }

  const auto base = path.parent_path();
  std::vector<Segment> segments;
  segments.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Segment s;
    s.segment_id = row[idx[0]];
    s.recording_id = row[idx[1]];
    s.location_id = row[idx[2]];
    if (!row[idx[3]].empty()) s.label = row[idx[3]];
    std::filesystem::path fp = row[idx[4]];
    s.feature_path = fp.is_relative() ? base / fp : fp;
    if (s.segment_id.empty()) throw Error(path.string() + ": empty segment_id");
    segments.push_back(std::move(s));
  }
  try {
    return Dataset(std::move(segments));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_manifest(const Dataset& dataset, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, kManifestColumns);
  for (const auto& s : dataset.segments()) {
    csv::write_row(out, {s.segment_id, s.recording_id, s.location_id, s.label.value_or(""),
                         s.feature_path.string()});
  }
  csv::write_text(path, out.str());
}

std::vector<FeatureMatrix> load_features(const Dataset& dataset, ExecPolicy policy) {
  const auto& segs = dataset.segments();
  std::vector<std::optional<FeatureMatrix>> slots(segs.size());
  parallel_for(segs.size(), policy,
               [&](std::size_t i) { slots[i] = read_feature_matrix(segs[i].feature_path); });
  std::vector<FeatureMatrix> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

SoftTarget one_hot(std::size_t class_index, std::size_t class_count) {
  if (class_index >= class_count) {
    throw RangeError("class index " + std::to_string(class_index) + " out of range for " +
                     std::to_string(class_count) + " classes");
  }
  SoftTarget t(class_count, 0.0);
  t[class_index] = 1.0;
  return t;
}

}  // namespace asc
