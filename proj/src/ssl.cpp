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

#include "asc/ssl.hpp"

#include <algorithm>
#include <sstream>

#include "asc/csv.hpp"
#include "asc/error.hpp"

namespace asc {

void SslConfig::validate() const {
  if (!(threshold >= 0.0)) throw ConfigError("ssl threshold must be >= 0");
  if (rounds < 1) throw ConfigError("ssl rounds must be >= 1");
}

std::uint64_t ssl_training_seed(std::uint64_t seed) { return derive_seed(seed, "ssl:train"); }

PseudoLabelRound relabel_and_retrain(const ClassifierModel& model, const Trainer& trainer,
                                     std::span<const Example> labeled,
                                     std::span<const UnlabeledSample> unlabeled,
                                     const SslConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<Vector> features;
  features.reserve(unlabeled.size());
  for (const auto& u : unlabeled) features.push_back(u.features);
  const auto probs = predict_batch(model, features);

  PseudoLabelRound round{model, {labeled.begin(), labeled.end()}, 0};
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    const std::size_t top = argmax(probs[i]);
    if (probs[i][top] > config.threshold) {
      round.augmented.push_back({unlabeled[i].features, one_hot(top, model.class_count())});
      ++round.accepted;
    }
  }
  round.model = trainer(round.augmented, ssl_training_seed(seed));
  return round;
}

PseudoLabelRound pseudo_label_round(const Trainer& trainer, std::span<const Example> labeled,
                                    std::span<const UnlabeledSample> unlabeled,
                                    const SslConfig& config, std::uint64_t seed) {
  if (labeled.empty()) throw Error("pseudo-labeling needs a nonempty labeled set");
  const ClassifierModel base = trainer(labeled, ssl_training_seed(seed));
  return relabel_and_retrain(base, trainer, labeled, unlabeled, config, seed);
}

PseudoLabelRun pseudo_label_run(const Trainer& trainer, std::span<const Example> labeled,
                                std::span<const UnlabeledSample> unlabeled,
                                const SslConfig& config, std::uint64_t seed) {
  config.validate();
  if (labeled.empty()) throw Error("pseudo-labeling needs a nonempty labeled set");
  PseudoLabelRun run{trainer(labeled, ssl_training_seed(seed)), {}};
  for (std::size_t r = 0; r < config.rounds; ++r) {
    auto round = relabel_and_retrain(run.model, trainer, labeled, unlabeled, config, seed);
    run.model = std::move(round.model);
    run.accepted_per_round.push_back(round.accepted);
  }
  return run;
}

void write_round_log(const PseudoLabelRun& run, std::size_t total_unlabeled, double threshold,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, {"round", "accepted", "total_unlabeled", "threshold"});
  for (std::size_t r = 0; r < run.accepted_per_round.size(); ++r) {
    csv::write_row(out, {std::to_string(r + 1), std::to_string(run.accepted_per_round[r]),
                         std::to_string(total_unlabeled), csv::format_double(threshold)});
  }
  csv::write_text(path, out.str());
}

}  // namespace asc
