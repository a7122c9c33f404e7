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

#include "asc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "asc/csv.hpp"
#include "asc/error.hpp"
#include "asc/rng.hpp"

namespace asc {

namespace {

using std::chrono::days;
using std::chrono::floor;

std::vector<Standing> rank_best(const std::map<std::string, double>& best) {
  std::vector<Standing> out;
  for (const auto& [team, score] : best) out.push_back({0, team, score});
  std::stable_sort(out.begin(), out.end(),
                   [](const Standing& a, const Standing& b) { return a.score > b.score; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace

IdSet EvaluationSplit::all_ids() const {
  IdSet out = public_ids;
  out.insert(private_ids.begin(), private_ids.end());
  return out;
}

EvaluationSplit make_eval_split(const LabelMap& truth, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw RangeError("split ratio must lie in (0, 1)");
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& [id, label] : truth) by_class[label].push_back(id);

  Rng rng = make_rng(seed, "harness:split");
  struct Share {
    std::string label;
    std::size_t take;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [label, ids] : by_class) {
    const double exact = ratio * static_cast<double>(ids.size());
    const auto take = static_cast<std::size_t>(std::floor(exact));
    shares.push_back({label, take, exact - static_cast<double>(take)});
    assigned += take;
  }
  const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(truth.size())));
  // Largest remainder first; equal remainders in seeded random order.
  std::shuffle(shares.begin(), shares.end(), rng);
  std::stable_sort(shares.begin(), shares.end(),
                   [](const Share& a, const Share& b) { return a.remainder > b.remainder; });
  for (std::size_t i = 0; assigned < target && i < shares.size(); ++i) {
    if (shares[i].remainder > 0.0) {
      ++shares[i].take;
      ++assigned;
    }
  }

  EvaluationSplit split;
  split.seed = seed;
  std::sort(shares.begin(), shares.end(),
            [](const Share& a, const Share& b) { return a.label < b.label; });
  for (const auto& share : shares) {
    auto ids = by_class[share.label];
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < share.take ? split.public_ids : split.private_ids).insert(ids[i]);
    }
  }
  return split;
}

double score_submission(const LabelMap& predictions, const LabelMap& truth, const IdSet& subset,
                        const std::optional<std::set<std::string>>& vocabulary) {
  std::set<std::string> known;
  if (vocabulary) {
    known = *vocabulary;
  } else {
    for (const auto& [id, label] : truth) known.insert(label);
  }
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (const auto& id : subset) {
    if (!predictions.count(id)) {
      if (missing.size() < 10) missing.push_back(id);
      ++missing_count;
    }
  }
  if (missing_count) {
    std::string msg = "submission is missing " + std::to_string(missing_count) + " id(s):";
    for (const auto& id : missing) msg += " " + id;
    if (missing_count > missing.size()) msg += " ...";
    throw Error(msg);
  }
  for (const auto& [id, label] : predictions) {
    if (!known.count(label)) throw Error("unknown label '" + label + "' for segment '" + id + "'");
  }
  if (subset.empty()) throw Error("cannot score an empty subset");

  std::size_t correct = 0;
  for (const auto& id : subset) {
    auto t = truth.find(id);
    if (t == truth.end()) throw Error("no ground truth for segment '" + id + "'");
    if (predictions.at(id) == t->second) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(subset.size());
}

void write_truth(const TruthFile& truth, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, {"segment_id", "scene_label", "subset"});
  for (const auto& [id, label] : truth.labels) {
    const char* subset = truth.split.public_ids.count(id)    ? "public"
                         : truth.split.private_ids.count(id) ? "private"
                                                             : nullptr;
    if (!subset) throw Error("truth id '" + id + "' is in neither subset");
    csv::write_row(out, {id, label, subset});
  }
  csv::write_text(path, out.str());
}

TruthFile read_truth(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header != csv::Row{"segment_id", "scene_label", "subset"}) {
    throw Error(path.string() + ": expected header segment_id,scene_label,subset");
  }
  TruthFile truth;
  for (const auto& row : table.rows) {
    if (!truth.labels.emplace(row[0], row[1]).second) {
      throw Error(path.string() + ": duplicate segment_id '" + row[0] + "'");
    }
    if (row[2] == "public") {
      truth.split.public_ids.insert(row[0]);
    } else if (row[2] == "private") {
      truth.split.private_ids.insert(row[0]);
    } else {
      throw Error(path.string() + ": subset must be public or private, got '" + row[2] + "'");
    }
  }
  return truth;
}

LabelMap read_submission(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header != csv::Row{"segment_id", "scene_label"}) {
    throw Error(path.string() + ": expected header segment_id,scene_label");
  }
  LabelMap out;
  for (const auto& row : table.rows) {
    if (!out.emplace(row[0], row[1]).second) {
      throw Error(path.string() + ": duplicate segment_id '" + row[0] + "'");
    }
  }
  return out;
}

void write_submission(const LabelMap& predictions, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, {"segment_id", "scene_label"});
  for (const auto& [id, label] : predictions) csv::write_row(out, {id, label});
  csv::write_text(path, out.str());
}

Timestamp parse_timestamp(const std::string& text) {
  int y, mo, d, h, mi, s;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z' || text.size() != 20) {
    throw Error("bad timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0) {
    throw Error("bad timestamp '" + text + "'");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s};
}

std::string format_timestamp(Timestamp t) {
  const auto day = floor<days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Leaderboard::Leaderboard(TruthFile truth, std::size_t limit_per_day)
    : truth_(std::move(truth)), limit_per_day_(limit_per_day) {
  if (limit_per_day_ < 1) throw ConfigError("daily submission limit must be >= 1");
}

Leaderboard Leaderboard::replay(TruthFile truth, std::size_t limit_per_day,
                                std::vector<JournalEntry> journal) {
  Leaderboard board(std::move(truth), limit_per_day);
  board.journal_ = std::move(journal);
  return board;
}

SubmissionResponse Leaderboard::record_submission(const std::string& team, Timestamp timestamp,
                                                  const LabelMap& predictions) {
  if (team.empty()) throw Error("team name must not be empty");
  const auto day = floor<days>(timestamp);
  std::size_t today = 0;
  for (const auto& e : journal_) {
    if (e.accepted && e.team == team && floor<days>(e.timestamp) == day) ++today;
  }
  if (today >= limit_per_day_) {
    journal_.push_back({team, timestamp, std::nullopt, std::nullopt, false});
    return {false, std::nullopt, Timestamp{day + days{1}}};
  }

  // Every evaluation id must be covered exactly once, and nothing else.
  const IdSet all = truth_.split.all_ids();
  for (const auto& [id, label] : predictions) {
    if (!all.count(id)) throw Error("submission contains unknown segment '" + id + "'");
  }
  const double pub = score_submission(predictions, truth_.labels, truth_.split.public_ids);
  const double priv = score_submission(predictions, truth_.labels, truth_.split.private_ids);
  journal_.push_back({team, timestamp, pub, priv, true});
  return {true, pub, std::nullopt};
}

std::vector<Standing> Leaderboard::public_standings() const {
  std::map<std::string, double> best;
  for (const auto& e : journal_) {
    if (!e.accepted) continue;
    auto [it, inserted] = best.emplace(e.team, *e.public_score);
    if (!inserted) it->second = std::max(it->second, *e.public_score);
  }
  return rank_best(best);
}

std::vector<Standing> Leaderboard::final_ranking() const {
  if (!finalized_) throw Error("private leaderboard is hidden until the competition ends");
  std::map<std::string, double> best;
  for (const auto& e : journal_) {
    if (!e.accepted) continue;
    auto [it, inserted] = best.emplace(e.team, *e.private_score);
    if (!inserted) it->second = std::max(it->second, *e.private_score);
  }
  return rank_best(best);
}

std::vector<JournalEntry> read_journal(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  const auto table = csv::read(path);
  if (table.header != csv::Row{"team", "timestamp", "public_score", "private_score", "accepted"}) {
    throw Error(path.string() + ": unexpected journal header");
  }
  std::vector<JournalEntry> out;
  for (const auto& row : table.rows) {
    JournalEntry e;
    e.team = row[0];
    e.timestamp = parse_timestamp(row[1]);
    if (row[4] != "0" && row[4] != "1") throw Error(path.string() + ": accepted must be 0 or 1");
    e.accepted = row[4] == "1";
    if (e.accepted) {
      e.public_score = csv::parse_double(row[2], path.string());
      e.private_score = csv::parse_double(row[3], path.string());
    }
    out.push_back(std::move(e));
  }
  return out;
}

void append_journal(const JournalEntry& entry, const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path);
  if (fresh && path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open journal " + path.string());
  if (fresh) csv::write_row(out, {"team", "timestamp", "public_score", "private_score", "accepted"});
  auto score = [](const std::optional<double>& s) { return s ? csv::format_double(*s) : ""; };
  csv::write_row(out, {entry.team, format_timestamp(entry.timestamp), score(entry.public_score),
                       score(entry.private_score), entry.accepted ? "1" : "0"});
  if (!out) throw IoError("journal append failed: " + path.string());
}

}  // namespace asc
