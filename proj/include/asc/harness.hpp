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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace asc {

/// segment_id -> scene label.
using LabelMap = std::map<std::string, std::string>;
using IdSet = std::set<std::string>;

enum class Subset { public_board, private_board };

struct EvaluationSplit {
  IdSet public_ids;
  IdSet private_ids;
  std::uint64_t seed = 0;

  IdSet all_ids() const;
};

/// Class-stratified random split. The public total is round(ratio * N) and is
/// apportioned across classes by largest remainder, so every class gets
/// floor or ceil of its share.
EvaluationSplit make_eval_split(const LabelMap& truth, double ratio, std::uint64_t seed);

/// Fraction of `subset` ids whose predicted label equals the truth. Labels
/// outside `vocabulary` (default: the set of truth labels) are rejected.
double score_submission(const LabelMap& predictions, const LabelMap& truth, const IdSet& subset,
                        const std::optional<std::set<std::string>>& vocabulary = std::nullopt);

/// Harness-private ground truth: CSV `segment_id,scene_label,subset`.
struct TruthFile {
  LabelMap labels;
  EvaluationSplit split;
};
void write_truth(const TruthFile& truth, const std::filesystem::path& path);
TruthFile read_truth(const std::filesystem::path& path);

/// Submission CSV `segment_id,scene_label`; duplicate ids are rejected.
LabelMap read_submission(const std::filesystem::path& path);
void write_submission(const LabelMap& predictions, const std::filesystem::path& path);

using Timestamp = std::chrono::sys_seconds;

/// ISO 8601 UTC, e.g. 2018-01-15T09:30:00Z.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(Timestamp t);

struct JournalEntry {
  std::string team;
  Timestamp timestamp;
  std::optional<double> public_score;   // absent when rejected
  std::optional<double> private_score;  // absent when rejected
  bool accepted = false;
};

/// What a team sees after submitting. There is deliberately no private field.
struct SubmissionResponse {
  bool accepted = false;
  std::optional<double> public_score;
  std::optional<Timestamp> next_allowed;  // set on rejection
};

struct Standing {
  std::size_t rank = 0;
  std::string team;
  double score = 0.0;
};

/// Public/private leaderboard with a per-team daily submission limit counted
/// per UTC calendar day. State is the journal; replaying it rebuilds state.
class Leaderboard {
 public:
  Leaderboard(TruthFile truth, std::size_t limit_per_day = 2);

  static Leaderboard replay(TruthFile truth, std::size_t limit_per_day,
                            std::vector<JournalEntry> journal);

  SubmissionResponse record_submission(const std::string& team, Timestamp timestamp,
                                       const LabelMap& predictions);

  /// Best public score per team.
  std::vector<Standing> public_standings() const;

  /// Ends the competition; private results become queryable.
  void finalize() { finalized_ = true; }
  bool finalized() const noexcept { return finalized_; }

  /// Best private score per team, best first. Throws before finalize().
  std::vector<Standing> final_ranking() const;

  const std::vector<JournalEntry>& journal() const noexcept { return journal_; }
  const TruthFile& truth() const noexcept { return truth_; }

 private:
  TruthFile truth_;
  std::size_t limit_per_day_;
  std::vector<JournalEntry> journal_;
  bool finalized_ = false;
};

/// CSV `team,timestamp,public_score,private_score,accepted`.
std::vector<JournalEntry> read_journal(const std::filesystem::path& path);
void append_journal(const JournalEntry& entry, const std::filesystem::path& path);

}  // namespace asc
