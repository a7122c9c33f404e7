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

#include <cmath>
#include <numeric>

#include "asc/augment.hpp"
#include "asc/error.hpp"
#include "support.hpp"

using namespace asc;

TEST_CASE("sample_lambda: Beta(1,1) is uniform") {
  const MixupConfig cfg(1.0);
  Rng rng(10);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double l = sample_lambda(cfg, rng);
    REQUIRE(l >= 0.0);
    REQUIRE(l <= 1.0);
    sum += l;
  }
  CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("sample_lambda variance matches Beta(a,a)") {
  for (double alpha : {0.2, 0.5, 2.0}) {
    const MixupConfig cfg(alpha);
    Rng rng(11);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double l = sample_lambda(cfg, rng);
      sum += l;
      sq += l * l;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    // Var of Beta(a,a) = 1 / (4 (2a + 1)).
    CHECK(var == doctest::Approx(1.0 / (4.0 * (2.0 * alpha + 1.0))).epsilon(0.03));
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("sample_lambda is reproducible and alpha must be positive") {
  const MixupConfig cfg(0.2);
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(sample_lambda(cfg, a) == sample_lambda(cfg, b));
  CHECK_THROWS_AS(MixupConfig(0.0), ConfigError);
  CHECK_THROWS_AS(MixupConfig(-1.0), ConfigError);
}

TEST_CASE("mixup worked example and endpoints") {
  const Vector xi{2, 0}, xj{0, 2}, yi{1, 0}, yj{0, 1};
  const auto half = mixup(xi, yi, xj, yj, 0.5);
  CHECK(half.features == Vector{1, 1});
  CHECK(half.target == SoftTarget{0.5, 0.5});

  const auto one = mixup(xi, yi, xj, yj, 1.0);
  CHECK(one.features == xi);
  CHECK(one.target == yi);
  const auto zero = mixup(xi, yi, xj, yj, 0.0);
  CHECK(zero.features == xj);
  CHECK(zero.target == yj);

  CHECK_THROWS_AS(mixup(Vector{1, 2, 3}, yi, xj, yj, 0.5), ShapeError);
  CHECK_THROWS_AS(mixup(xi, SoftTarget{1, 0, 0}, xj, yj, 0.5), ShapeError);
}

TEST_CASE("mixup properties on random inputs") {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = 1 + test::random_index(rng, 20);
    const auto c = 2 + test::random_index(rng, 6);
    const auto xi = test::random_vector(rng, p, -5, 5);
    const auto xj = test::random_vector(rng, p, -5, 5);
    const auto yi = one_hot(test::random_index(rng, c), c);
    const auto yj = one_hot(test::random_index(rng, c), c);
    const double l = uniform01(rng);

    const auto m = mixup(xi, yi, xj, yj, l);
    const auto swapped = mixup(xj, yj, xi, yi, 1.0 - l);
    double sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < c; ++k) {
      CHECK(m.target[k] >= 0.0);
      CHECK(m.target[k] <= 1.0);
      CHECK(std::abs(m.target[k] - swapped.target[k]) <= 1e-9);
      sum += m.target[k];
      nonzero += m.target[k] != 0.0;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(nonzero <= 2);
    for (std::size_t k = 0; k < p; ++k) {
      CHECK(m.features[k] >= std::min(xi[k], xj[k]) - 1e-12);
      CHECK(m.features[k] <= std::max(xi[k], xj[k]) + 1e-12);
      CHECK(std::abs(m.features[k] - swapped.features[k]) <= 1e-9);
    }
  }
}

TEST_CASE("matrix mixup keeps shape") {
  Rng rng(13);
  const auto a = test::random_matrix(rng, 3, 4);
  const auto b = test::random_matrix(rng, 3, 4);
  const auto m = mixup(a, b, 0.25);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 4);
  CHECK(m(1, 2) == doctest::Approx(0.25 * a(1, 2) + 0.75 * b(1, 2)));
  CHECK_THROWS_AS(mixup(a, test::random_matrix(rng, 4, 3), 0.5), ShapeError);
}

TEST_CASE("mixup_batch") {
  const MixupConfig cfg(0.4);
  Rng rng(14);

  std::vector<Example> same(5, Example{{1.0, -2.0, 3.0}, {0.0, 1.0}});
  const auto out = mixup_batch(same, cfg, rng);
  REQUIRE(out.size() == same.size());
  for (const auto& e : out) {
    CHECK(e.features == same[0].features);
    CHECK(e.target == same[0].target);
  }

  std::vector<Example> batch;
  for (int i = 0; i < 16; ++i) {
    batch.push_back({test::random_vector(rng, 4), one_hot(test::random_index(rng, 3), 3)});
  }
  const auto mixed = mixup_batch(batch, cfg, rng);
  REQUIRE(mixed.size() == batch.size());
  for (const auto& e : mixed) {
    CHECK(std::abs(std::accumulate(e.target.begin(), e.target.end(), 0.0) - 1.0) <= 1e-9);
  }

  CHECK_THROWS_AS(mixup_batch(std::span<const Example>(batch.data(), 1), cfg, rng), Error);
}

TEST_CASE("random_erase at probability 0 is the identity") {
  Rng rng(15);
  EraseConfig cfg;
  cfg.probability = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto m = test::random_matrix(rng, 6, 9);
    CHECK(random_erase(m, cfg, rng) == m);
  }
}

TEST_CASE("random_erase full cover") {
  EraseConfig cfg;
  cfg.probability = 1.0;
  cfg.area_low = cfg.area_high = 1.0;
  cfg.fill_value = -3.0;
  Rng rng(16);

  cfg.aspect_low = cfg.aspect_high = 1.0;
  const auto square = random_erase(test::random_matrix(rng, 8, 8, 0, 1), cfg, rng);
  for (double v : square.values()) CHECK(v == -3.0);

  cfg.aspect_low = 0.05;
  cfg.aspect_high = 0.1;
  const auto wide = random_erase(test::random_matrix(rng, 40, 501, 0, 1), cfg, rng);
  for (double v : wide.values()) REQUIRE(v == -3.0);
}

TEST_CASE("random_erase changes exactly one rectangle and respects area bounds") {
  EraseConfig cfg;  // defaults
  cfg.fill_value = -100.0;
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{40, 501}, {16, 16}, {8, 30}}) {
    std::size_t fired = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Rng data_rng(seed);
      const auto m = test::random_matrix(data_rng, rows, cols, 0.0, 1.0);
      Rng a = make_rng(seed, "erase");
      Rng b = make_rng(seed, "erase");
      const auto rect = sample_erase_rect(rows, cols, cfg, a);
      const auto out = random_erase(m, cfg, b);

      std::size_t filled = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const bool inside = rect && rect->contains(r, c);
          if (inside) {
            REQUIRE(out(r, c) == cfg.fill_value);
          } else {
            REQUIRE(out(r, c) == m(r, c));
          }
          filled += out(r, c) == cfg.fill_value;
        }
      }
      const double frac = static_cast<double>(filled) / static_cast<double>(rows * cols);
      CHECK(frac <= cfg.area_high);
      if (rect) {
        ++fired;
        CHECK(frac >= cfg.area_low * 0.75);
      } else {
        CHECK(filled == 0);
      }
    }
    CHECK(fired > 400);
    CHECK(fired < 600);
  }
}

TEST_CASE("EraseConfig validation") {
  EraseConfig cfg;
  cfg.area_low = 0.5;
  cfg.area_high = 0.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EraseConfig{};
  cfg.probability = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EraseConfig{};
  cfg.aspect_low = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(EraseConfig{}.validate());
}
