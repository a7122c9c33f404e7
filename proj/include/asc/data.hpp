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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asc/parallel.hpp"

namespace asc {

using Vector = std::vector<double>;

/// Length-C class distribution used as a training target. One-hot for
/// labeled data; soft after mixup.
using SoftTarget = std::vector<double>;

/// F x T grid of log mel-band energies, row-major with one row per frequency
/// bin. Values are held in double precision; every value is finite.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// Throws RangeError if any value is NaN or infinite.
void require_finite(const FeatureMatrix& m);

struct Segment {
  std::string segment_id;
  std::string recording_id;
  std::string location_id;
  std::optional<std::string> label;
  std::filesystem::path feature_path;
};

/// Segments in manifest order plus the sorted label vocabulary.
class Dataset {
 public:
  Dataset() = default;
  /// Validates id uniqueness and builds the vocabulary from the labels.
  explicit Dataset(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  std::size_t size() const noexcept { return segments_.size(); }
  std::size_t class_count() const noexcept { return vocabulary_.size(); }

  /// Position of label in the vocabulary; RangeError if absent.
  std::size_t class_index(const std::string& label) const;

 private:
  std::vector<Segment> segments_;
  std::vector<std::string> vocabulary_;
};

/// Reads an ASCF feature file. Errors are FormatError with the failing offset.
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);
FeatureMatrix parse_feature_matrix(std::span<const unsigned char> bytes);

/// Serializes values as float32. Values not representable as float32 are
/// rounded to nearest; values that overflow float32 are rejected.
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
std::vector<unsigned char> encode_feature_matrix(const FeatureMatrix& m);

/// Loads a manifest CSV. Relative feature paths resolve against the
/// manifest's directory.
Dataset load_manifest(const std::filesystem::path& path);
void write_manifest(const Dataset& dataset, const std::filesystem::path& path);

/// Reads every segment's feature file; reads of distinct files may overlap.
std::vector<FeatureMatrix> load_features(const Dataset& dataset,
                                         ExecPolicy policy = ExecPolicy::parallel);

SoftTarget one_hot(std::size_t class_index, std::size_t class_count);

}  // namespace asc
