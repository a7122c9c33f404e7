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

// Serial reference versus OpenMP kernel, one benchmark pair per hot loop.
// The argument selects the policy: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "asc/balance.hpp"
#include "asc/data.hpp"
#include "asc/ensemble.hpp"
#include "asc/model.hpp"
#include "support.hpp"

using namespace asc;

namespace {

ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::serial : ExecPolicy::parallel;
}

std::vector<AggregatedPoint> cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<AggregatedPoint> pts(n, AggregatedPoint(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : pts[i]) v = g(rng) + static_cast<double>(i % 4) * 3.0;
  }
  return pts;
}

void BM_gmm_fit(benchmark::State& state) {
  const auto pts = cloud(4000, 16, 1);
  for (auto _ : state) {
    auto fit = gmm_fit(pts, 8, {.max_iters = 20, .tol = 0.0, .seed = 1, .policy = policy_of(state)});
    benchmark::DoNotOptimize(fit.log_likelihood);
  }
}
BENCHMARK(BM_gmm_fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_predict_batch(benchmark::State& state) {
  Rng rng(2);
  const auto model = ClassifierModel::initialized(Architecture::mlp, 40 * 50, 15, 64, rng);
  std::vector<Vector> xs;
  for (int i = 0; i < 256; ++i) xs.push_back(test::random_vector(rng, 40 * 50));
  for (auto _ : state) {
    auto p = predict_batch(model, xs, policy_of(state));
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_predict_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_fuse_average(benchmark::State& state) {
  Rng rng(3);
  std::vector<ProbabilityTable> tables(10);
  for (auto& t : tables) {
    for (int n = 0; n < 20000; ++n) {
      auto p = test::random_vector(rng, 15, 0.0, 1.0);
      double s = 0.0;
      for (double q : p) s += q;
      for (auto& q : p) q /= s;
      t.push_back(std::move(p));
    }
  }
  for (auto _ : state) {
    auto f = fuse_average(tables, policy_of(state));
    benchmark::DoNotOptimize(f.labels.data());
  }
}
BENCHMARK(BM_fuse_average)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_empirical_symmetric_kl(benchmark::State& state) {
  const auto a = cloud(20000, 16, 4);
  const auto b = cloud(20000, 16, 5);
  const auto fa = gmm_fit(a, 8, {.max_iters = 5, .seed = 1}).model;
  const auto fb = gmm_fit(b, 8, {.max_iters = 5, .seed = 2}).model;
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_symmetric_kl(fa, a, fb, b, policy_of(state)));
  }
}
BENCHMARK(BM_empirical_symmetric_kl)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_select_balanced_split(benchmark::State& state) {
  Rng rng(6);
  ClassRecordings corpus;
  std::map<std::string, std::vector<AggregatedPoint>> points;
  for (int c = 0; c < 3; ++c) {
    const std::string label = "c" + std::to_string(c);
    for (int r = 0; r < 12; ++r) {
      const std::string rec = label + "_r" + std::to_string(r);
      for (int s = 0; s < 10; ++s) {
        const std::string id = rec + "_s" + std::to_string(s);
        corpus[label][rec].push_back(id);
        points[id] = cloud(5, 8, rng());
      }
    }
  }
  const auto cands = generate_candidates(corpus, 60, 30, 32, rng);
  const auto scorer = make_divergence_scorer(points, 2, {.max_iters = 30, .seed = 1, .policy = ExecPolicy::serial});
  for (auto _ : state) {
    Rng pick(7);
    auto sel = select_balanced_split(cands, scorer, pick, policy_of(state));
    benchmark::DoNotOptimize(sel.index);
  }
}
BENCHMARK(BM_select_balanced_split)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_load_features(benchmark::State& state) {
  static test::TempDir dir("bench_features");
  static const Dataset ds = load_manifest(test::write_blob_corpus(dir.path(), "bench", 200, 5, 40, 501, 8));
  for (auto _ : state) {
    auto ms = load_features(ds, policy_of(state));
    benchmark::DoNotOptimize(ms.data());
  }
}
BENCHMARK(BM_load_features)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
