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

#include "asc/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "asc/augment.hpp"
#include "asc/error.hpp"

namespace asc {

FeatureVariant parse_variant(const std::string& name) {
  if (name == "raw") return FeatureVariant::raw;
  if (name == "temporal") return FeatureVariant::temporal;
  if (name == "bsub" || name == "background") return FeatureVariant::background;
  throw ConfigError("unknown preprocess variant '" + name + "' (expected raw, temporal or bsub)");
}

std::string to_string(FeatureVariant variant) {
  switch (variant) {
    case FeatureVariant::raw: return "raw";
    case FeatureVariant::temporal: return "temporal";
    case FeatureVariant::background: return "bsub";
  }
  return "raw";
}

MatrixSet load_matrix_set(const Dataset& dataset, const std::vector<std::string>& vocabulary) {
  MatrixSet set;
  set.matrices = load_features(dataset);
  for (const auto& s : dataset.segments()) {
    set.ids.push_back(s.segment_id);
    if (!s.label) {
      set.labels.push_back(std::nullopt);
      continue;
    }
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), *s.label);
    if (it == vocabulary.end() || *it != *s.label) {
      throw Error("segment '" + s.segment_id + "' has label '" + *s.label +
                  "' absent from the training vocabulary");
    }
    set.labels.push_back(static_cast<std::size_t>(it - vocabulary.begin()));
  }
  return set;
}

FeaturePipeline::FeaturePipeline(FeatureVariant variant, std::optional<StandardizerStats> stats,
                                 std::size_t rows, std::size_t cols)
    : variant_(variant), stats_(std::move(stats)), rows_(rows), cols_(cols) {}

FeatureMatrix FeaturePipeline::shape_only(const FeatureMatrix& m) const {
  switch (variant_) {
    case FeatureVariant::raw: return m;
    case FeatureVariant::temporal: return FeatureMatrix(m.rows(), 1, temporal_average(m));
    case FeatureVariant::background: return background_subtract(m);
  }
  return m;
}

FeaturePipeline FeaturePipeline::fit(FeatureVariant variant, bool standardize,
                                     std::span<const FeatureMatrix> train) {
  if (train.empty()) throw Error("feature pipeline needs training matrices");
  FeaturePipeline p(variant, std::nullopt, 0, 0);
  std::vector<FeatureMatrix> shaped;
  shaped.reserve(train.size());
  for (const auto& m : train) {
    if (m.rows() != train.front().rows() || m.cols() != train.front().cols()) {
      throw ShapeError("training matrices differ in shape");
    }
    shaped.push_back(p.shape_only(m));
  }
  p.rows_ = shaped.front().rows();
  p.cols_ = shaped.front().cols();
  if (standardize) p.stats_ = fit_standardizer(shaped);
  return p;
}

FeatureMatrix FeaturePipeline::transform(const FeatureMatrix& m) const {
  FeatureMatrix shaped = shape_only(m);
  if (shaped.rows() != rows_ || shaped.cols() != cols_) {
    throw ShapeError("feature matrix shape differs from the training shape");
  }
  return stats_ ? apply_standardizer(*stats_, shaped) : shaped;
}

Vector FeaturePipeline::features(const FeatureMatrix& m) const { return transform(m).values(); }

std::vector<Vector> FeaturePipeline::features(std::span<const FeatureMatrix> ms) const {
  std::vector<Vector> out(ms.size());
  parallel_for(ms.size(), ExecPolicy::parallel, [&](std::size_t i) { out[i] = features(ms[i]); });
  return out;
}

BatchAugmenter make_augmenter(const RunConfig& config, std::size_t rows, std::size_t cols) {
  const bool erase = config.get_bool("random_erasing");
  const bool mix = config.get_bool("mixup");
  if (!erase && !mix) return {};
  const EraseConfig erase_cfg = config.erase_config();
  const MixupConfig mix_cfg = config.mixup_config();
  return [=](std::vector<Example> batch, Rng& rng) {
    if (erase) {
      for (auto& ex : batch) {
        FeatureMatrix m(rows, cols, std::move(ex.features));
        if (auto rect = sample_erase_rect(rows, cols, erase_cfg, rng)) {
          fill_rect(m, *rect, erase_cfg.fill_value);
        }
        ex.features = m.values();
      }
    }
    if (mix && batch.size() >= 2) batch = mixup_batch(batch, mix_cfg, rng);
    return batch;
  };
}

Trainer make_trainer(const RunConfig& config, std::size_t input_dim, std::size_t class_count,
                     BatchAugmenter augment) {
  const Architecture arch = parse_architecture(config.get("model"));
  const std::size_t hidden = config.get_size("hidden_units");
  const TrainConfig base = config.train_config();
  return [=](std::span<const Example> data, std::uint64_t seed) {
    Rng init = make_rng(seed, "model:init");
    auto model = ClassifierModel::initialized(arch, input_dim, class_count, hidden, init);
    TrainConfig tc = base;
    tc.seed = seed;
    return train(std::move(model), data, tc, augment).model;
  };
}

std::vector<Example> make_examples(std::span<const Vector> features,
                                   std::span<const std::optional<std::size_t>> labels,
                                   std::size_t class_count) {
  if (features.size() != labels.size()) throw ShapeError("features and labels differ in count");
  std::vector<Example> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!labels[i]) throw Error("training example " + std::to_string(i) + " is unlabeled");
    out.push_back({features[i], one_hot(*labels[i], class_count)});
  }
  return out;
}

double accuracy(const ProbabilityTable& probs, std::span<const std::optional<std::size_t>> labels) {
  if (probs.size() != labels.size()) throw ShapeError("accuracy: size mismatch");
  std::size_t correct = 0, counted = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!labels[i]) continue;
    ++counted;
    if (argmax(probs[i]) == *labels[i]) ++correct;
  }
  if (counted == 0) throw Error("accuracy: no labeled samples");
  return static_cast<double>(correct) / static_cast<double>(counted);
}

std::string AblationTable::to_csv() const {
  std::ostringstream out;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  if (mode == "table1") {
    out << "combination,clr,random_erasing,mixup,accuracy,delta\n";
    for (const auto& r : rows) {
      out << r.name << ',' << yn(r.clr) << ',' << yn(r.random_erasing) << ',' << yn(r.mixup)
          << ',' << fmt(r.accuracy) << ',' << fmt(r.delta) << '\n';
    }
  } else {
    out << "method,accuracy,delta\n";
    for (const auto& r : rows) out << r.name << ',' << fmt(r.accuracy) << ',' << fmt(r.delta) << '\n';
  }
  return out.str();
}

namespace {

struct VariantRun {
  ProbabilityTable test_probs;
  double accuracy;
};

VariantRun train_and_eval(const RunConfig& config, FeatureVariant variant, const MatrixSet& train,
                          const MatrixSet& test, std::size_t class_count) {
  const auto pipe = FeaturePipeline::fit(variant, config.get_bool("standardize"), train.matrices);
  const auto train_x = pipe.features(train.matrices);
  const auto test_x = pipe.features(test.matrices);
  const auto examples = make_examples(train_x, train.labels, class_count);
  const auto trainer = make_trainer(config, pipe.rows() * pipe.cols(), class_count,
                                    make_augmenter(config, pipe.rows(), pipe.cols()));
  const auto model = trainer(examples, derive_seed(config.get_u64("seed"), "ablation:train"));
  VariantRun run;
  run.test_probs = predict_batch(model, test_x);
  run.accuracy = 100.0 * asc::accuracy(run.test_probs, test.labels);
  return run;
}

}  // namespace

AblationTable run_ablation(const RunConfig& config, const MatrixSet& train, const MatrixSet& test,
                           std::size_t class_count) {
  AblationTable table;
  table.mode = config.get("ablation_mode");
  if (table.mode == "table1") {
    struct Combo {
      const char* name;
      bool clr, erase, mix;
    };
    static constexpr Combo kCombos[] = {
        {"baseline", false, false, false},
        {"baseline+clr", true, false, false},
        {"baseline+random_erasing", false, true, false},
        {"baseline+mixup", false, false, true},
        {"baseline+all_but_clr", false, true, true},
        {"baseline+all", true, true, true},
    };
    const auto variant = parse_variant(config.get("preprocess"));
    for (const auto& c : kCombos) {
      RunConfig rc = config;
      rc.set("clr", c.clr ? "true" : "false");
      rc.set("random_erasing", c.erase ? "true" : "false");
      rc.set("mixup", c.mix ? "true" : "false");
      try {
        const auto run = train_and_eval(rc, variant, train, test, class_count);
        table.rows.push_back({c.name, c.clr, c.erase, c.mix, run.accuracy, 0.0});
      } catch (const std::exception& e) {
        throw Error(std::string("ablation row '") + c.name + "': " + e.what());
      }
    }
  } else if (table.mode == "table3") {
    const bool clr = config.get_bool("clr");
    const bool erase = config.get_bool("random_erasing");
    const bool mix = config.get_bool("mixup");
    const std::pair<const char*, FeatureVariant> variants[] = {
        {"baseline", FeatureVariant::raw},
        {"temporal_averaging", FeatureVariant::temporal},
        {"background_subtraction", FeatureVariant::background},
    };
    std::vector<ProbabilityTable> probs;
    for (const auto& [name, variant] : variants) {
      try {
        auto run = train_and_eval(config, variant, train, test, class_count);
        table.rows.push_back({name, clr, erase, mix, run.accuracy, 0.0});
        probs.push_back(std::move(run.test_probs));
      } catch (const std::exception& e) {
        throw Error(std::string("ablation row '") + name + "': " + e.what());
      }
    }
    const auto fused = fuse_average(probs);
    table.rows.push_back(
        {"fusion", clr, erase, mix, 100.0 * accuracy(fused.probabilities, test.labels), 0.0});
  } else {
    throw ConfigError("ablation_mode must be table1 or table3, got '" + table.mode + "'");
  }
  const double base = table.rows.front().accuracy;
  for (auto& r : table.rows) r.delta = r.accuracy - base;
  table.rows.front().delta = 0.0;
  return table;
}

}  // namespace asc
