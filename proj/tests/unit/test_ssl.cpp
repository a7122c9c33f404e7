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

#include <fstream>
#include <sstream>

#include "asc/error.hpp"
#include "asc/ssl.hpp"
#include "support.hpp"

using namespace asc;

namespace {

Trainer linear_trainer(std::size_t p, std::size_t c) {
  return [p, c](std::span<const Example> train_set, std::uint64_t seed) {
    Rng init = make_rng(seed, "init");
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 8;
    cfg.base_lr = cfg.max_lr = 0.1;
    cfg.seed = seed;
    return train(ClassifierModel::initialized(Architecture::linear, p, c, 0, init), train_set, cfg).model;
  };
}

struct Blobs {
  std::vector<Example> labeled;
  std::vector<UnlabeledSample> unlabeled;
};

Blobs make_blobs(std::uint64_t seed, std::size_t labeled, std::size_t unlabeled) {
  Rng rng(seed);
  Blobs b;
  auto draw = [&](std::size_t cls) {
    Vector x = test::random_vector(rng, 4, -1.0, 1.0);
    x[cls] += 2.5;
    return x;
  };
  for (std::size_t i = 0; i < labeled; ++i) b.labeled.push_back({draw(i % 3), one_hot(i % 3, 3)});
  for (std::size_t i = 0; i < unlabeled; ++i) b.unlabeled.push_back({"u" + std::to_string(i), draw(i % 3)});
  return b;
}

std::size_t count_confident(const ClassifierModel& model, const std::vector<UnlabeledSample>& u,
                            double threshold) {
  std::size_t n = 0;
  for (const auto& s : u) {
    const auto p = forward(model, s.features);
    n += *std::max_element(p.begin(), p.end()) > threshold;
  }
  return n;
}

}  // namespace

TEST_CASE("accepted count matches a direct count of confident predictions") {
  const auto blobs = make_blobs(1, 30, 60);
  const auto trainer = linear_trainer(4, 3);
  for (double threshold : {0.0, 0.4, 0.5, 0.7, 0.9, 0.99, 1.0}) {
    SslConfig cfg;
    cfg.threshold = threshold;
    const auto round = pseudo_label_round(trainer, blobs.labeled, blobs.unlabeled, cfg, 7);
    const auto base = trainer(blobs.labeled, ssl_training_seed(7));
    CHECK(round.accepted == count_confident(base, blobs.unlabeled, threshold));
    CHECK(round.augmented.size() == blobs.labeled.size() + round.accepted);
    if (threshold == 0.0) CHECK(round.accepted == blobs.unlabeled.size());
    if (threshold >= 1.0) {
      CHECK(round.accepted == 0);
      CHECK(round.augmented.size() == blobs.labeled.size());
    }
    for (std::size_t i = blobs.labeled.size(); i < round.augmented.size(); ++i) {
      const auto& t = round.augmented[i].target;
      CHECK(std::count(t.begin(), t.end(), 1.0) == 1);
    }
  }
}

TEST_CASE("raising the threshold never increases acceptance") {
  const auto blobs = make_blobs(2, 30, 60);
  const auto model = linear_trainer(4, 3)(blobs.labeled, 3);
  std::size_t previous = blobs.unlabeled.size();
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const auto n = count_confident(model, blobs.unlabeled, t);
    CHECK(n <= previous);
    previous = n;
  }
}

TEST_CASE("pseudo_label_run") {
  const auto blobs = make_blobs(3, 30, 60);
  const auto trainer = linear_trainer(4, 3);

  SslConfig one;
  one.rounds = 1;
  const auto run = pseudo_label_run(trainer, blobs.labeled, blobs.unlabeled, one, 11);
  const auto round = pseudo_label_round(trainer, blobs.labeled, blobs.unlabeled, one, 11);
  CHECK(run.model == round.model);
  CHECK(run.accepted_per_round == std::vector<std::size_t>{round.accepted});

  SslConfig three;
  const auto a = pseudo_label_run(trainer, blobs.labeled, blobs.unlabeled, three, 11);
  const auto b = pseudo_label_run(trainer, blobs.labeled, blobs.unlabeled, three, 11);
  CHECK(a.accepted_per_round.size() == 3);
  CHECK(a.accepted_per_round == b.accepted_per_round);
  CHECK(a.model == b.model);

  const auto empty = pseudo_label_run(trainer, blobs.labeled, {}, three, 11);
  CHECK(empty.accepted_per_round == std::vector<std::size_t>{0, 0, 0});
  CHECK(empty.model == trainer(blobs.labeled, ssl_training_seed(11)));

  CHECK_THROWS_AS(pseudo_label_run(trainer, {}, blobs.unlabeled, three, 1), Error);
  SslConfig zero_rounds;
  zero_rounds.rounds = 0;
  CHECK_THROWS_AS(pseudo_label_run(trainer, blobs.labeled, blobs.unlabeled, zero_rounds, 1), ConfigError);
}

TEST_CASE("round log") {
  test::TempDir dir("ssl");
  PseudoLabelRun run{ClassifierModel(Architecture::linear, 1, 2), {5, 7, 8}};
  write_round_log(run, 10, 0.5, dir / "log.csv");
  std::ifstream in(dir / "log.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "round,accepted,total_unlabeled,threshold\n1,5,10,0.5\n2,7,10,0.5\n3,8,10,0.5\n");
}
