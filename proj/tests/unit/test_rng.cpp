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

#include <set>

#include "asc/parallel.hpp"
#include "asc/rng.hpp"

using namespace asc;

TEST_CASE("derive_seed is deterministic and name-sensitive") {
  CHECK(derive_seed(7, "train") == derive_seed(7, "train"));
  CHECK(derive_seed(7, "train") != derive_seed(7, "test"));
  CHECK(derive_seed(7, "train") != derive_seed(8, "train"));

  std::set<std::uint64_t> seen;
  for (std::uint64_t root = 0; root < 100; ++root) {
    for (const char* name : {"a", "b", "kfold:fold0", "kfold:fold1"}) {
      seen.insert(derive_seed(root, name));
    }
  }
  CHECK(seen.size() == 400);
}

TEST_CASE("make_rng streams reproduce") {
  Rng a = make_rng(42, "stage");
  Rng b = make_rng(42, "stage");
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("uniform01 stays in [0,1) with mean near 0.5") {
  Rng rng(3);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), ExecPolicy::parallel, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);

  CHECK_THROWS_AS(parallel_for(100, ExecPolicy::parallel,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
