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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asc/data.hpp"
#include "asc/model.hpp"
#include "asc/parallel.hpp"
#include "asc/rng.hpp"

namespace asc {

enum class GroupKey { location, recording };

GroupKey parse_group_key(const std::string& name);
const std::string& group_of(const Segment& segment, GroupKey key);

/// Maps every group (location or recording id) to one fold in [0, k).
struct FoldAssignment {
  std::size_t k = 0;
  GroupKey key = GroupKey::location;
  std::map<std::string, std::size_t> fold_of_group;

  std::size_t fold_of(const Segment& segment) const;
  std::vector<std::string> groups_in(std::size_t fold) const;
};

/// Shuffles the distinct groups and deals them round-robin to k folds.
FoldAssignment make_folds(const Dataset& dataset, std::size_t k, GroupKey key, Rng& rng);

/// Builds a model from training examples. Must be safe to call concurrently.
using Trainer =
    std::function<ClassifierModel(std::span<const Example> train, std::uint64_t seed)>;

/// N x C probabilities for one model.
using ProbabilityTable = std::vector<ProbabilityVector>;

struct KFoldResult {
  FoldAssignment folds;
  std::vector<ClassifierModel> models;  // model k never saw fold k
  ProbabilityTable out_of_fold;         // per segment, from the model that held it out
  double out_of_fold_accuracy = 0.0;
};

/// Trains one model per fold on the other folds. Fold shuffling uses the
/// "kfold:folds" stream and fold k trains with seed "kfold:fold<k>".
KFoldResult train_kfold(const Dataset& dataset, std::span<const Vector> features,
                        std::size_t k, const Trainer& trainer, GroupKey key,
                        std::uint64_t seed, ExecPolicy policy = ExecPolicy::serial);

/// Per-sample plurality vote over M label rows of length N. Ties go to the
/// tied class with the highest summed confidence when confidences are given,
/// then to the lowest class index.
std::vector<std::size_t> fuse_majority(
    std::span<const std::vector<std::size_t>> votes, std::size_t class_count,
    std::optional<std::span<const ProbabilityTable>> confidences = std::nullopt);

struct FusedPrediction {
  std::vector<std::size_t> labels;
  ProbabilityTable probabilities;
};

/// Arithmetic mean of M probability tables; label = argmax, ties to lowest.
FusedPrediction fuse_average(std::span<const ProbabilityTable> tables,
                             ExecPolicy policy = ExecPolicy::parallel);

/// Labels of one table by argmax.
std::vector<std::size_t> argmax_labels(const ProbabilityTable& table);

struct ProbabilityFile {
  std::vector<std::string> segment_ids;
  std::vector<std::string> vocabulary;
  ProbabilityTable probabilities;
};

/// CSV `segment_id,p_<class0>,...,p_<classC-1>` in vocabulary order.
void write_probabilities(const ProbabilityFile& file, const std::filesystem::path& path);
ProbabilityFile read_probabilities(const std::filesystem::path& path);

}  // namespace asc
