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
#include <span>
#include <string>
#include <vector>

#include "asc/augment.hpp"
#include "asc/ensemble.hpp"
#include "asc/model.hpp"

namespace asc {

struct SslConfig {
  double threshold = 0.5;  // strict lower bound on max confidence
  std::size_t rounds = 3;

  void validate() const;
};

/// An evaluation segment as the learner sees it: no label field exists.
struct UnlabeledSample {
  std::string segment_id;
  Vector features;
};

struct PseudoLabelRound {
  ClassifierModel model;          // retrained from scratch on `augmented`
  std::vector<Example> augmented;  // labeled set followed by accepted pseudo-labels
  std::size_t accepted = 0;
};

struct PseudoLabelRun {
  ClassifierModel model;
  std::vector<std::size_t> accepted_per_round;
};

/// Every training call in a pseudo-labeling run uses this seed, so retraining
/// on an unchanged set reproduces the plain model exactly.
std::uint64_t ssl_training_seed(std::uint64_t seed);

/// Labels `unlabeled` with `model`, keeps samples whose top probability
/// exceeds the threshold as hard one-hot targets, and retrains from scratch
/// on the labeled set plus the kept samples.
PseudoLabelRound relabel_and_retrain(const ClassifierModel& model, const Trainer& trainer,
                                     std::span<const Example> labeled,
                                     std::span<const UnlabeledSample> unlabeled,
                                     const SslConfig& config, std::uint64_t seed);

/// Train on labeled, then one relabel_and_retrain.
PseudoLabelRound pseudo_label_round(const Trainer& trainer, std::span<const Example> labeled,
                                    std::span<const UnlabeledSample> unlabeled,
                                    const SslConfig& config, std::uint64_t seed);

/// `config.rounds` sequential rounds. Each round starts from the original
/// labeled set and re-derives pseudo-labels with the newest model.
PseudoLabelRun pseudo_label_run(const Trainer& trainer, std::span<const Example> labeled,
                                std::span<const UnlabeledSample> unlabeled,
                                const SslConfig& config, std::uint64_t seed);

/// CSV `round,accepted,total_unlabeled,threshold`, rounds numbered from 1.
void write_round_log(const PseudoLabelRun& run, std::size_t total_unlabeled, double threshold,
                     const std::filesystem::path& path);

}  // namespace asc
