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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asc/data.hpp"
#include "asc/ensemble.hpp"
#include "asc/model.hpp"
#include "asc/preprocess.hpp"
#include "asc/run_config.hpp"

namespace asc {

enum class FeatureVariant { raw, temporal, background };

FeatureVariant parse_variant(const std::string& name);
std::string to_string(FeatureVariant variant);

/// Feature matrices with class indices into a shared vocabulary. Labels are
/// absent for unlabeled data.
struct MatrixSet {
  std::vector<std::string> ids;
  std::vector<FeatureMatrix> matrices;
  std::vector<std::optional<std::size_t>> labels;
};

/// Loads features for every segment; labels are indexed into `vocabulary`.
MatrixSet load_matrix_set(const Dataset& dataset, const std::vector<std::string>& vocabulary);

/// Variant transform followed by optional standardization fitted on training
/// matrices only:
///   raw        -> F x T
///   temporal   -> F x 1 (temporal average)
///   background -> F x T (background subtraction)
class FeaturePipeline {
 public:
  static FeaturePipeline fit(FeatureVariant variant, bool standardize,
                             std::span<const FeatureMatrix> train);

  FeatureMatrix transform(const FeatureMatrix& m) const;
  Vector features(const FeatureMatrix& m) const;
  std::vector<Vector> features(std::span<const FeatureMatrix> ms) const;

  FeatureVariant variant() const noexcept { return variant_; }
  const std::optional<StandardizerStats>& standardizer() const noexcept { return stats_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  FeaturePipeline(FeatureVariant variant, std::optional<StandardizerStats> stats,
                  std::size_t rows, std::size_t cols);

 private:
  FeatureMatrix shape_only(const FeatureMatrix& m) const;

  FeatureVariant variant_;
  std::optional<StandardizerStats> stats_;
  std::size_t rows_;
  std::size_t cols_;
};

/// Random erasing (on the rows x cols view of each example) then mixup, per
/// the toggles in config. Returns an empty augmenter when both are off.
BatchAugmenter make_augmenter(const RunConfig& config, std::size_t rows, std::size_t cols);

/// Trainer that initializes a fresh model from the seed and runs `train`.
Trainer make_trainer(const RunConfig& config, std::size_t input_dim, std::size_t class_count,
                     BatchAugmenter augment = {});

std::vector<Example> make_examples(std::span<const Vector> features,
                                   std::span<const std::optional<std::size_t>> labels,
                                   std::size_t class_count);

double accuracy(const ProbabilityTable& probs, std::span<const std::optional<std::size_t>> labels);

struct AblationRow {
  std::string name;
  bool clr = false;
  bool random_erasing = false;
  bool mixup = false;
  double accuracy = 0.0;  // percent
  double delta = 0.0;     // percentage points versus the baseline row
};

struct AblationTable {
  std::string mode;  // table1 | table3
  std::vector<AblationRow> rows;

  std::string to_csv() const;
};

/// table1: the six CLR / random erasing / mixup combinations on the config's
/// preprocessing variant. table3: the config's toggles on raw, temporal and
/// background-subtracted features plus their average fusion. Every row
/// trains with the same seed.
AblationTable run_ablation(const RunConfig& config, const MatrixSet& train, const MatrixSet& test,
                           std::size_t class_count);

}  // namespace asc
