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

#include "asc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "asc/csv.hpp"
#include "asc/error.hpp"

namespace asc {

namespace {

void require_simplex(const ProbabilityVector& p, std::size_t classes) {
  if (p.size() != classes) throw ShapeError("probability row has wrong class count");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw RangeError("probability outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw RangeError("probability row does not sum to 1");
}

}  // namespace

GroupKey parse_group_key(const std::string& name) {
  if (name == "location" || name == "location_id") return GroupKey::location;
  if (name == "recording" || name == "recording_id") return GroupKey::recording;
  throw ConfigError("unknown group key '" + name + "' (expected location or recording)");
}

const std::string& group_of(const Segment& segment, GroupKey key) {
  return key == GroupKey::location ? segment.location_id : segment.recording_id;
}

std::size_t FoldAssignment::fold_of(const Segment& segment) const {
  auto it = fold_of_group.find(group_of(segment, key));
  if (it == fold_of_group.end()) {
    throw RangeError("segment '" + segment.segment_id + "' has a group outside the folds");
  }
  return it->second;
}

std::vector<std::string> FoldAssignment::groups_in(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [group, f] : fold_of_group) {
    if (f == fold) out.push_back(group);
  }
  return out;
}

FoldAssignment make_folds(const Dataset& dataset, std::size_t k, GroupKey key, Rng& rng) {
  if (k < 2) throw ConfigError("fold count must be >= 2");
  std::set<std::string> distinct;
  for (const auto& s : dataset.segments()) distinct.insert(group_of(s, key));
  if (distinct.size() < k) {
    throw Error("insufficient groups: " + std::to_string(distinct.size()) +
                " distinct groups for " + std::to_string(k) + " folds");
  }
  std::vector<std::string> groups(distinct.begin(), distinct.end());
  std::shuffle(groups.begin(), groups.end(), rng);
  FoldAssignment folds;
  folds.k = k;
  folds.key = key;
  for (std::size_t i = 0; i < groups.size(); ++i) folds.fold_of_group[groups[i]] = i % k;
  return folds;
}

KFoldResult train_kfold(const Dataset& dataset, std::span<const Vector> features,
                        std::size_t k, const Trainer& trainer, GroupKey key,
                        std::uint64_t seed, ExecPolicy policy) {
  const auto& segs = dataset.segments();
  if (features.size() != segs.size()) throw ShapeError("train_kfold: features not aligned");
  const std::size_t C = dataset.class_count();
  std::vector<std::size_t> labels(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!segs[i].label) throw Error("train_kfold: segment '" + segs[i].segment_id + "' is unlabeled");
    labels[i] = dataset.class_index(*segs[i].label);
  }

  KFoldResult result;
  Rng fold_rng = make_rng(seed, "kfold:folds");
  result.folds = make_folds(dataset, k, key, fold_rng);
  std::vector<std::size_t> fold_of(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) fold_of[i] = result.folds.fold_of(segs[i]);

  std::vector<std::optional<ClassifierModel>> models(k);
  parallel_for(k, policy, [&](std::size_t fold) {
    std::vector<Example> train_set;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (fold_of[i] != fold) train_set.push_back({features[i], one_hot(labels[i], C)});
    }
    try {
      models[fold] = trainer(train_set, derive_seed(seed, "kfold:fold" + std::to_string(fold)));
    } catch (const std::exception& e) {
      throw Error("fold " + std::to_string(fold) + ": " + e.what());
    }
  });

  result.out_of_fold.resize(segs.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    result.out_of_fold[i] = forward(*models[fold_of[i]], features[i]);
    if (argmax(result.out_of_fold[i]) == labels[i]) ++correct;
  }
  result.out_of_fold_accuracy =
      segs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(segs.size());
  for (auto& m : models) result.models.push_back(std::move(*m));
  return result;
}

std::vector<std::size_t> fuse_majority(
    std::span<const std::vector<std::size_t>> votes, std::size_t class_count,
    std::optional<std::span<const ProbabilityTable>> confidences) {
  if (votes.empty()) throw ShapeError("fuse_majority: no models");
  const std::size_t N = votes.front().size();
  for (const auto& row : votes) {
    if (row.size() != N) throw ShapeError("fuse_majority: ragged vote matrix");
    for (std::size_t v : row) {
      if (v >= class_count) throw RangeError("fuse_majority: label index out of range");
    }
  }
  if (confidences) {
    if (confidences->size() != votes.size()) {
      throw ShapeError("fuse_majority: confidence model count differs from vote count");
    }
    for (const auto& table : *confidences) {
      if (table.size() != N) throw ShapeError("fuse_majority: confidence table size mismatch");
      for (const auto& p : table) {
        if (p.size() != class_count) throw ShapeError("fuse_majority: confidence row size");
      }
    }
  }

  std::vector<std::size_t> fused(N);
  std::vector<std::size_t> counts(class_count);
  for (std::size_t n = 0; n < N; ++n) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& row : votes) ++counts[row[n]];
    const std::size_t top = *std::max_element(counts.begin(), counts.end());

    std::size_t best = class_count;
    double best_conf = 0.0;
    for (std::size_t c = 0; c < class_count; ++c) {
      if (counts[c] != top) continue;
      double conf = 0.0;
      if (confidences) {
        for (const auto& table : *confidences) conf += table[n][c];
      }
      // Strictly greater keeps the lowest index among equal confidences.
      if (best == class_count || conf > best_conf) {
        best = c;
        best_conf = conf;
      }
    }
    fused[n] = best;
  }
  return fused;
}

FusedPrediction fuse_average(std::span<const ProbabilityTable> tables, ExecPolicy policy) {
  if (tables.empty()) throw ShapeError("fuse_average: no models");
  const std::size_t N = tables.front().size();
  const std::size_t C = N ? tables.front().front().size() : 0;
  for (const auto& t : tables) {
    if (t.size() != N) throw ShapeError("fuse_average: models disagree on sample count");
    for (const auto& row : t) require_simplex(row, C);
  }
  FusedPrediction out;
  out.labels.resize(N);
  out.probabilities.assign(N, ProbabilityVector(C, 0.0));
  const double inv_m = 1.0 / static_cast<double>(tables.size());
  parallel_for(N, policy, [&](std::size_t n) {
    auto& row = out.probabilities[n];
    for (const auto& t : tables) {
      for (std::size_t c = 0; c < C; ++c) row[c] += t[n][c];
    }
    for (double& v : row) v *= inv_m;
    out.labels[n] = argmax(row);
  });
  return out;
}

std::vector<std::size_t> argmax_labels(const ProbabilityTable& table) {
  std::vector<std::size_t> out;
  out.reserve(table.size());
  for (const auto& row : table) out.push_back(argmax(row));
  return out;
}

void write_probabilities(const ProbabilityFile& file, const std::filesystem::path& path) {
  if (file.segment_ids.size() != file.probabilities.size()) {
    throw ShapeError("write_probabilities: ids and rows differ in count");
  }
  std::ostringstream out;
  csv::Row header{"segment_id"};
  for (const auto& c : file.vocabulary) header.push_back("p_" + c);
  csv::write_row(out, header);
  for (std::size_t n = 0; n < file.segment_ids.size(); ++n) {
    const auto& p = file.probabilities[n];
    if (p.size() != file.vocabulary.size()) throw ShapeError("probability row size mismatch");
    csv::Row row{file.segment_ids[n]};
    for (double v : p) row.push_back(csv::format_double(v));
    csv::write_row(out, row);
  }
  csv::write_text(path, out.str());
}

ProbabilityFile read_probabilities(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header.empty() || table.header[0] != "segment_id") {
    throw Error(path.string() + ": first column must be segment_id");
  }
  ProbabilityFile file;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto& h = table.header[c];
    if (h.rfind("p_", 0) != 0) throw Error(path.string() + ": column '" + h + "' lacks p_ prefix");
    file.vocabulary.push_back(h.substr(2));
  }
  for (const auto& row : table.rows) {
    file.segment_ids.push_back(row[0]);
    ProbabilityVector p;
    for (std::size_t c = 1; c < row.size(); ++c) {
      p.push_back(csv::parse_double(row[c], path.string()));
    }
    file.probabilities.push_back(std::move(p));
  }
  return file;
}

}  // namespace asc
