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

#include "asc/error.hpp"
#include "asc/preprocess.hpp"
#include "support.hpp"

using namespace asc;

namespace {

double row_mean(const FeatureMatrix& m, std::size_t r) {
  double s = 0.0;
  for (double v : m.row(r)) s += v;
  return s / static_cast<double>(m.cols());
}

}  // namespace

TEST_CASE("temporal_average examples") {
  CHECK(temporal_average(FeatureMatrix(3, 5, 2.5)) == Vector{2.5, 2.5, 2.5});
  CHECK(temporal_average(FeatureMatrix(2, 2, {1, 3, 2, 2})) == Vector{2, 2});
  Rng rng(1);
  CHECK(temporal_average(test::random_matrix(rng, 40, 501)).size() == 40);
}

TEST_CASE("background_subtract examples") {
  CHECK(background_subtract(FeatureMatrix(1, 2, {1, 3})) == FeatureMatrix(1, 2, {-1, 1}));
  const auto z = background_subtract(FeatureMatrix(4, 6, 7.0));
  for (double v : z.values()) CHECK(v == 0.0);
}

TEST_CASE("preprocessing properties on random matrices") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = test::random_matrix(rng, 1 + test::random_index(rng, 40),
                                       1 + test::random_index(rng, 60), -80.0, 20.0);
    const auto b = background_subtract(m);
    for (std::size_t r = 0; r < m.rows(); ++r) CHECK(std::abs(row_mean(b, r)) < 1e-9);

    const auto bb = background_subtract(b);
    for (std::size_t k = 0; k < b.size(); ++k) CHECK(std::abs(bb.values()[k] - b.values()[k]) < 1e-9);

    for (double v : temporal_average(b)) CHECK(std::abs(v) < 1e-9);

    const double c = uniform(rng, -3.0, 3.0);
    std::vector<double> scaled(m.values());
    for (auto& v : scaled) v *= c;
    const auto ta = temporal_average(m);
    const auto tc = temporal_average(FeatureMatrix(m.rows(), m.cols(), scaled));
    for (std::size_t f = 0; f < ta.size(); ++f) CHECK(tc[f] == doctest::Approx(c * ta[f]).epsilon(1e-12));
  }
}

TEST_CASE("fit_standardizer examples") {
  const std::vector<FeatureMatrix> constant{FeatureMatrix(3, 4, 5.0)};
  const auto s = fit_standardizer(constant);
  CHECK(s.means == Vector{5, 5, 5});
  CHECK(s.stds == Vector{1e-6, 1e-6, 1e-6});

  const std::vector<FeatureMatrix> two{FeatureMatrix(1, 1, 0.0), FeatureMatrix(1, 1, 2.0)};
  const auto t = fit_standardizer(two);
  CHECK(t.means[0] == 1.0);
  CHECK(t.stds[0] == 1.0);

  CHECK_THROWS_AS(fit_standardizer(std::vector<FeatureMatrix>{}), Error);
  const std::vector<FeatureMatrix> mismatched{FeatureMatrix(2, 3), FeatureMatrix(3, 3)};
  CHECK_THROWS_AS(fit_standardizer(mismatched), Error);
}

TEST_CASE("standardized training pool has zero mean and unit std per bin") {
  Rng rng(3);
  std::vector<FeatureMatrix> pool;
  for (int i = 0; i < 8; ++i) pool.push_back(test::random_matrix(rng, 5, 1 + test::random_index(rng, 20), -50, 10));
  const auto stats = fit_standardizer(pool);
  for (std::size_t f = 0; f < 5; ++f) {
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto& m : pool) {
      const auto z = apply_standardizer(stats, m);
      for (double v : z.row(f)) {
        sum += v;
        sq += v * v;
        n += 1.0;
      }
    }
    CHECK(std::abs(sum / n) < 1e-9);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("apply_standardizer") {
  Rng rng(4);
  const auto m = test::random_matrix(rng, 3, 7);
  const StandardizerStats identity{{0, 0, 0}, {1, 1, 1}};
  CHECK(apply_standardizer(identity, m) == m);

  const StandardizerStats stats{{1.5, -2.0, 4.0}, {2.0, 0.5, 3.0}};
  FeatureMatrix at_means(3, 4);
  for (std::size_t f = 0; f < 3; ++f) {
    for (auto& v : at_means.row(f)) v = stats.means[f];
  }
  const auto zeroed = apply_standardizer(stats, at_means);
  for (double v : zeroed.values()) CHECK(v == 0.0);

  const auto once = apply_standardizer(stats, m);
  CHECK_FALSE(apply_standardizer(stats, once) == once);
  CHECK_THROWS_AS(apply_standardizer(stats, test::random_matrix(rng, 4, 7)), ShapeError);
}

TEST_CASE("standardizer CSV round-trip") {
  test::TempDir dir("std");
  Rng rng(5);
  std::vector<FeatureMatrix> pool{test::random_matrix(rng, 6, 9), test::random_matrix(rng, 6, 4)};
  const auto stats = fit_standardizer(pool);
  write_standardizer(stats, dir / "s.csv");
  const auto back = read_standardizer(dir / "s.csv");
  CHECK(back.means == stats.means);
  CHECK(back.stds == stats.stds);
}
