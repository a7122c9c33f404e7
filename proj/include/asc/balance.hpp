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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "asc/data.hpp"
#include "asc/parallel.hpp"
#include "asc/rng.hpp"

namespace asc {

/// Per-bin window mean followed by per-bin window standard deviation (2F).
using AggregatedPoint = Vector;

/// Windows start at 0, hop, 2*hop, ... while start + window <= cols.
std::vector<AggregatedPoint> aggregate_windows(const FeatureMatrix& m, std::size_t window = 50,
                                               std::size_t hop = 25);

/// Diagonal-covariance Gaussian mixture.
class GmmModel {
 public:
  static constexpr double kVarianceFloor = 1e-6;

  GmmModel(std::vector<double> weights, std::vector<Vector> means, std::vector<Vector> variances);

  std::size_t components() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return means_.front().size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Vector>& means() const noexcept { return means_; }
  const std::vector<Vector>& variances() const noexcept { return variances_; }

  friend bool operator==(const GmmModel&, const GmmModel&) = default;

 private:
  std::vector<double> weights_;
  std::vector<Vector> means_;
  std::vector<Vector> variances_;
};

struct GmmFitConfig {
  std::size_t max_iters = 100;
  double tol = 1e-6;  // relative log-likelihood improvement
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::parallel;
};

struct GmmFit {
  GmmModel model;
  double log_likelihood;               // total over points, at the returned model
  std::vector<double> history;         // log-likelihood before each M-step, then final
  std::size_t reseeded_components = 0;  // empty components re-seeded during EM
};

/// EM from seeded distinct data points as means, the global variance as every
/// component's variance, and uniform weights.
GmmFit gmm_fit(std::span<const AggregatedPoint> points, std::size_t components,
               const GmmFitConfig& config = {});

/// log sum_k w_k N(x; mu_k, diag var_k), via log-sum-exp.
double gmm_log_density(const GmmModel& model, std::span<const double> x);

/// Mean of gmm_log_density over points.
double mean_log_density(const GmmModel& model, std::span<const AggregatedPoint> points,
                        ExecPolicy policy = ExecPolicy::parallel);

/// mean_A[log pA - log pB] + mean_B[log pB - log pA].
double empirical_symmetric_kl(const GmmModel& model_a, std::span<const AggregatedPoint> points_a,
                              const GmmModel& model_b, std::span<const AggregatedPoint> points_b,
                              ExecPolicy policy = ExecPolicy::parallel);

enum class SplitSet { development, evaluation };

const char* to_string(SplitSet set);

/// recording id -> segment ids, for one class.
using RecordingSegments = std::map<std::string, std::vector<std::string>>;
/// class label -> its recordings.
using ClassRecordings = std::map<std::string, RecordingSegments>;

struct SplitCandidate {
  std::map<std::string, std::map<std::string, SplitSet>> recording_set;  // class -> rec -> set
  std::vector<std::string> development;
  std::vector<std::string> evaluation;
};

/// Random whole-recording assignment per class, then random segment picks to
/// hit the per-class targets exactly. Infeasible classes are rejected up front.
std::vector<SplitCandidate> generate_candidates(const ClassRecordings& classes,
                                                std::size_t dev_target, std::size_t eval_target,
                                                std::size_t n_candidates, Rng& rng,
                                                std::size_t retry_cap = 10000);

/// Divergence of one candidate; lower is more similar. Called concurrently.
using CandidateScorer = std::function<double(const SplitCandidate&, std::size_t index)>;

struct BalancedSelection {
  std::size_t index = 0;
  std::vector<double> scores;
  std::vector<std::size_t> top;  // lowest-scoring ceil(n/4) candidates, best first
};

/// Scores every candidate and picks uniformly among the lowest ceil(25%).
BalancedSelection select_balanced_split(std::span<const SplitCandidate> candidates,
                                        const CandidateScorer& scorer, Rng& rng,
                                        ExecPolicy policy = ExecPolicy::parallel);

/// Pools aggregated points per set across classes, fits one GMM per set
/// (seed = base seed + candidate index) and returns their divergence.
CandidateScorer make_divergence_scorer(
    const std::map<std::string, std::vector<AggregatedPoint>>& points_by_segment,
    std::size_t components, GmmFitConfig config);

/// CSV `segment_id,set`.
void write_split_manifest(const SplitCandidate& candidate, const std::filesystem::path& path);
/// CSV `candidate,score,selected`.
void write_candidate_report(const BalancedSelection& selection,
                            const std::filesystem::path& path);

}  // namespace asc
