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

#include "doctest.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "asc/ensemble.hpp"
#include "asc/error.hpp"
#include "support.hpp"

using namespace asc;

namespace {

// 20 segments per location, alternating two classes, two recordings per location.
Dataset synthetic_dataset(std::size_t locations, std::size_t per_location = 20) {
  std::vector<Segment> segs;
  for (std::size_t l = 0; l < locations; ++l) {
    for (std::size_t i = 0; i < per_location; ++i) {
      Segment s;
      s.segment_id = "l" + std::to_string(l) + "_s" + std::to_string(i);
      s.location_id = "loc" + std::to_string(l);
      s.recording_id = s.location_id + "_r" + std::to_string(i % 2);
      s.label = i % 2 == 0 ? "a" : "b";
      segs.push_back(s);
    }
  }
  return Dataset(segs);
}

// Always predicts the most common training label (lowest index on ties).
ClassifierModel majority_trainer(std::span<const Example> train, std::uint64_t) {
  const std::size_t c = train.front().target.size();
  std::vector<double> counts(c, 0.0);
  for (const auto& ex : train) counts[argmax(ex.target)] += 1.0;
  ClassifierModel m(Architecture::linear, train.front().features.size(), c);
  const std::size_t best = argmax(counts);
  m.parameters()[m.parameters().size() - c + best] = 1.0;
  return m;
}

std::size_t oracle_vote(const std::vector<std::size_t>& votes, std::size_t classes,
                        const std::vector<std::vector<double>>* conf) {
  std::map<std::size_t, std::size_t> freq;
  for (auto v : votes) ++freq[v];
  std::size_t top = 0;
  for (auto& [c, n] : freq) top = std::max(top, n);
  std::vector<std::pair<double, std::size_t>> tied;  // (-summed confidence, class)
  for (std::size_t c = 0; c < classes; ++c) {
    if (freq.count(c) && freq[c] == top) {
      double s = 0.0;
      if (conf) {
        for (const auto& row : *conf) s += row[c];
      }
      tied.push_back({-s, c});
    }
  }
  return std::min_element(tied.begin(), tied.end())->second;
}

}  // namespace

TEST_CASE("make_folds partitions groups") {
  Rng rng(1);
  const auto ds = synthetic_dataset(10);
  for (std::size_t k : {2u, 5u, 10u}) {
    const auto folds = make_folds(ds, k, GroupKey::location, rng);
    CHECK(folds.fold_of_group.size() == 10);
    std::set<std::string> seen;
    for (std::size_t f = 0; f < k; ++f) {
      const auto groups = folds.groups_in(f);
      CHECK(groups.size() >= 1);
      if (k == 5) CHECK(groups.size() == 2);
      for (const auto& g : groups) CHECK(seen.insert(g).second);
    }
    CHECK(seen.size() == 10);
    for (const auto& s : ds.segments()) {
      CHECK(folds.fold_of(s) == folds.fold_of_group.at(s.location_id));
    }
  }
  CHECK_THROWS_AS(make_folds(ds, 11, GroupKey::location, rng), Error);
  CHECK_THROWS_AS(make_folds(synthetic_dataset(4), 5, GroupKey::location, rng), Error);

  const auto by_rec = make_folds(ds, 5, GroupKey::recording, rng);
  CHECK(by_rec.fold_of_group.size() == 20);
}

TEST_CASE("train_kfold with a majority trainer") {
  const auto ds = synthetic_dataset(10);
  std::vector<Vector> features(ds.size(), Vector{0.0});
  const auto r = train_kfold(ds, features, 5, majority_trainer, GroupKey::location, 42);
  CHECK(r.models.size() == 5);
  CHECK(r.out_of_fold.size() == ds.size());
  CHECK(r.out_of_fold_accuracy == doctest::Approx(0.5));

  const auto again = train_kfold(ds, features, 5, majority_trainer, GroupKey::location, 42,
                                 ExecPolicy::parallel);
  CHECK(again.out_of_fold_accuracy == r.out_of_fold_accuracy);
  CHECK(again.out_of_fold == r.out_of_fold);
  CHECK(again.models == r.models);
}

TEST_CASE("train_kfold annotates trainer errors with the fold") {
  const auto ds = synthetic_dataset(4);
  std::vector<Vector> features(ds.size(), Vector{0.0});
  const Trainer failing = [](std::span<const Example>, std::uint64_t) -> ClassifierModel {
    throw Error("trainer exploded");
  };
  try {
    train_kfold(ds, features, 2, failing, GroupKey::location, 1);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fold") != std::string::npos);
  }
}

TEST_CASE("fuse_majority examples") {
  const std::vector<std::vector<std::size_t>> one{{2, 0, 1}};
  CHECK(fuse_majority(one, 3) == std::vector<std::size_t>{2, 0, 1});
  const std::vector<std::vector<std::size_t>> aab{{0}, {0}, {1}};
  CHECK(fuse_majority(aab, 2) == std::vector<std::size_t>{0});
  const std::vector<std::vector<std::size_t>> ragged{{0, 1}, {0}};
  CHECK_THROWS_AS(fuse_majority(ragged, 2), ShapeError);
}

TEST_CASE("fuse_majority equals the brute-force counter for every pattern") {
  Rng rng(2);
  for (std::size_t m = 1; m <= 5; ++m) {
    for (std::size_t c = 1; c <= 4; ++c) {
      std::size_t patterns = 1;
      for (std::size_t i = 0; i < m; ++i) patterns *= c;
      for (std::size_t code = 0; code < patterns; ++code) {
        std::vector<std::size_t> v(m);
        std::size_t x = code;
        for (std::size_t i = 0; i < m; ++i, x /= c) v[i] = x % c;
        std::vector<std::vector<std::size_t>> votes;
        for (auto label : v) votes.push_back({label});

        CHECK(fuse_majority(votes, c)[0] == oracle_vote(v, c, nullptr));

        std::vector<std::vector<double>> conf;
        std::vector<ProbabilityTable> tables;
        for (std::size_t i = 0; i < m; ++i) {
          auto p = test::random_vector(rng, c, 0.0, 1.0);
          const double s = std::accumulate(p.begin(), p.end(), 0.0);
          for (auto& q : p) q /= s;
          conf.push_back(p);
          tables.push_back({p});
        }
        CHECK(fuse_majority(votes, c, std::span<const ProbabilityTable>(tables))[0] ==
              oracle_vote(v, c, &conf));
      }
    }
  }
}

TEST_CASE("fuse_majority with odd M and two classes never ties") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::size_t>> votes(5, std::vector<std::size_t>(1));
    std::size_t ones = 0;
    for (auto& row : votes) ones += row[0] = test::random_index(rng, 2);
    CHECK(fuse_majority(votes, 2)[0] == (ones >= 3 ? 1u : 0u));
  }
}

TEST_CASE("fuse_average") {
  const std::vector<ProbabilityTable> two{{{0.6, 0.4}}, {{0.2, 0.8}}};
  const auto f = fuse_average(two);
  CHECK(f.probabilities[0][0] == doctest::Approx(0.4));
  CHECK(f.probabilities[0][1] == doctest::Approx(0.6));
  CHECK(f.labels[0] == 1);

  const std::vector<ProbabilityTable> bad{{{0.6, 0.6}}};
  CHECK_THROWS_AS(fuse_average(bad), Error);
  const std::vector<ProbabilityTable> mismatch{{{0.5, 0.5}}, {{0.5, 0.5}, {1.0, 0.0}}};
  CHECK_THROWS_AS(fuse_average(mismatch), ShapeError);

  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ProbabilityTable> tables(4);
    for (auto& t : tables) {
      for (int n = 0; n < 10; ++n) {
        auto p = test::random_vector(rng, 3, 0.0, 1.0);
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (auto& q : p) q /= s;
        t.push_back(p);
      }
    }
    const auto fused = fuse_average(tables, ExecPolicy::serial);
    CHECK(fuse_average(tables, ExecPolicy::parallel).probabilities == fused.probabilities);
    for (const auto& row : fused.probabilities) {
      CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
    }
    auto permuted = tables;
    std::reverse(permuted.begin(), permuted.end());
    const auto pf = fuse_average(permuted);
    for (std::size_t n = 0; n < 10; ++n) {
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(pf.probabilities[n][k] - fused.probabilities[n][k]) < 1e-15);
      }
    }

    const std::vector<ProbabilityTable> copies(3, tables[0]);
    const auto same = fuse_average(copies);
    CHECK(same.labels == argmax_labels(tables[0]));
    for (std::size_t n = 0; n < 10; ++n) {
      for (std::size_t k = 0; k < 3; ++k) CHECK(same.probabilities[n][k] == doctest::Approx(tables[0][n][k]).epsilon(1e-15));
    }
    std::vector<std::vector<std::size_t>> vote_copies(3, argmax_labels(tables[0]));
    CHECK(fuse_majority(vote_copies, 3) == argmax_labels(tables[0]));
  }
}

TEST_CASE("probability file round-trip") {
  test::TempDir dir("probs");
  const ProbabilityFile f{{"s1", "s,2"}, {"bus", "car"}, {{0.25, 0.75}, {1.0 / 3.0, 2.0 / 3.0}}};
  write_probabilities(f, dir / "p.csv");
  const auto back = read_probabilities(dir / "p.csv");
  CHECK(back.segment_ids == f.segment_ids);
  CHECK(back.vocabulary == f.vocabulary);
  CHECK(back.probabilities == f.probabilities);
}
