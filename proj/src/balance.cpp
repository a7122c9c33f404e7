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

#include "asc/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "asc/csv.hpp"
#include "asc/error.hpp"

namespace asc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // ln(2*pi)

// Per-component log(w_k) - 0.5 * sum_d log(2 pi var_kd).
std::vector<double> component_constants(const GmmModel& m) {
  std::vector<double> out(m.components());
  for (std::size_t k = 0; k < m.components(); ++k) {
    double s = 0.0;
    for (double v : m.variances()[k]) s += kLog2Pi + std::log(v);
    out[k] = std::log(m.weights()[k]) - 0.5 * s;
  }
  return out;
}

double component_log_term(const GmmModel& m, const std::vector<double>& constants, std::size_t k,
                          std::span<const double> x) {
  const auto& mu = m.means()[k];
  const auto& var = m.variances()[k];
  double q = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mu[d];
    q += diff * diff / var[d];
  }
  return constants[k] - 0.5 * q;
}

// log-sum-exp over components; writes posterior responsibilities when resp
// is non-null.
double log_density_impl(const GmmModel& m, const std::vector<double>& constants,
                        std::span<const double> x, double* resp) {
  const std::size_t K = m.components();
  double local[64];
  std::vector<double> heap;
  double* terms = local;
  if (K > 64) {
    heap.resize(K);
    terms = heap.data();
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    terms[k] = component_log_term(m, constants, k, x);
    top = std::max(top, terms[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) sum += std::exp(terms[k] - top);
  const double lse = top + std::log(sum);
  if (resp) {
    for (std::size_t k = 0; k < K; ++k) resp[k] = std::exp(terms[k] - lse);
  }
  return lse;
}

void require_dims(std::span<const AggregatedPoint> points, std::size_t dim, const char* who) {
  for (const auto& p : points) {
    if (p.size() != dim) throw ShapeError(std::string(who) + ": point dimension mismatch");
  }
}

struct EStep {
  std::vector<double> resp;       // n x K, row-major
  std::vector<double> point_ll;   // n
  double total = 0.0;
};

// E-step kernel. Per-point work is independent; the total is summed in index
// order afterwards so both policies give identical bits.
void expectation(const GmmModel& m, std::span<const AggregatedPoint> points, ExecPolicy policy,
                 EStep& out) {
  const std::size_t n = points.size();
  const std::size_t K = m.components();
  out.resp.resize(n * K);
  out.point_ll.resize(n);
  const auto constants = component_constants(m);
  parallel_for(n, policy, [&](std::size_t i) {
    out.point_ll[i] = log_density_impl(m, constants, points[i], out.resp.data() + i * K);
  });
  out.total = 0.0;
  for (double v : out.point_ll) out.total += v;
}

struct MStep {
  std::vector<double> mass;  // N_k
  std::vector<Vector> means;
  std::vector<Vector> variances;
};

// M-step kernel. Each component's sums run over points in index order, so
// parallelizing across components is bit-identical to the serial loop.
void maximization(std::span<const AggregatedPoint> points, const EStep& e, std::size_t K,
                  ExecPolicy policy, MStep& out) {
  const std::size_t n = points.size();
  const std::size_t D = points.front().size();
  out.mass.assign(K, 0.0);
  out.means.assign(K, Vector(D, 0.0));
  out.variances.assign(K, Vector(D, 0.0));
  parallel_for(K, policy, [&](std::size_t k) {
    double mass = 0.0;
    auto& mu = out.means[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double r = e.resp[i * K + k];
      mass += r;
      for (std::size_t d = 0; d < D; ++d) mu[d] += r * points[i][d];
    }
    out.mass[k] = mass;
    if (mass <= 0.0) return;
    for (double& v : mu) v /= mass;
    auto& var = out.variances[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double r = e.resp[i * K + k];
      for (std::size_t d = 0; d < D; ++d) {
        const double diff = points[i][d] - mu[d];
        var[d] += r * diff * diff;
      }
    }
    for (double& v : var) v = std::max(v / mass, GmmModel::kVarianceFloor);
  });
}

Vector global_variance(std::span<const AggregatedPoint> points) {
  const std::size_t D = points.front().size();
  const double n = static_cast<double>(points.size());
  Vector mean(D, 0.0), var(D, 0.0);
  for (const auto& p : points) {
    for (std::size_t d = 0; d < D; ++d) mean[d] += p[d];
  }
  for (double& v : mean) v /= n;
  for (const auto& p : points) {
    for (std::size_t d = 0; d < D; ++d) var[d] += (p[d] - mean[d]) * (p[d] - mean[d]);
  }
  for (double& v : var) v = std::max(v / n, GmmModel::kVarianceFloor);
  return var;
}

// Reachable subset sums of recording sizes, as a bit mask up to total.
bool split_feasible(const std::vector<std::size_t>& sizes, std::size_t dev, std::size_t eval) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total < dev + eval) return false;
  std::vector<char> reach(total + 1, 0);
  reach[0] = 1;
  for (std::size_t s : sizes) {
    for (std::size_t v = total; v >= s && s > 0; --v) {
      if (reach[v - s]) reach[v] = 1;
    }
  }
  for (std::size_t x = dev; x + eval <= total; ++x) {
    if (reach[x]) return true;
  }
  return false;
}

}  // namespace

std::vector<AggregatedPoint> aggregate_windows(const FeatureMatrix& m, std::size_t window,
                                               std::size_t hop) {
  if (window < 1) throw ConfigError("aggregation window must be >= 1 frame");
  if (hop < 1 || hop > window) throw ConfigError("aggregation hop must lie in [1, window]");
  if (m.cols() < window) {
    throw ShapeError("matrix has " + std::to_string(m.cols()) + " frames, window needs " +
                     std::to_string(window));
  }
  const std::size_t F = m.rows();
  const double inv_w = 1.0 / static_cast<double>(window);
  std::vector<AggregatedPoint> out;
  for (std::size_t start = 0; start + window <= m.cols(); start += hop) {
    AggregatedPoint p(2 * F);
    for (std::size_t f = 0; f < F; ++f) {
      const auto row = m.row(f).subspan(start, window);
      double sum = 0.0;
      for (double v : row) sum += v;
      const double mean = sum * inv_w;
      double ss = 0.0;
      for (double v : row) ss += (v - mean) * (v - mean);
      p[f] = mean;
      p[F + f] = std::sqrt(ss * inv_w);
    }
    out.push_back(std::move(p));
  }
  return out;
}

GmmModel::GmmModel(std::vector<double> weights, std::vector<Vector> means,
                   std::vector<Vector> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  const std::size_t K = weights_.size();
  if (K == 0 || means_.size() != K || variances_.size() != K) {
    throw ShapeError("gmm: component count mismatch");
  }
  const std::size_t D = means_.front().size();
  if (D == 0) throw ShapeError("gmm: zero-dimensional means");
  double wsum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (means_[k].size() != D || variances_[k].size() != D) {
      throw ShapeError("gmm: dimension mismatch in component " + std::to_string(k));
    }
    if (!(weights_[k] >= 0.0)) throw RangeError("gmm: negative weight");
    wsum += weights_[k];
    for (double& v : variances_[k]) {
      if (!(v > 0.0)) throw RangeError("gmm: variance must be positive");
      v = std::max(v, kVarianceFloor);
    }
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw RangeError("gmm: weights must sum to 1");
}

GmmFit gmm_fit(std::span<const AggregatedPoint> points, std::size_t components,
               const GmmFitConfig& config) {
  if (components < 1) throw ConfigError("gmm needs at least one component");
  if (points.size() < components) {
    throw Error("gmm_fit: " + std::to_string(points.size()) + " points for " +
                std::to_string(components) + " components");
  }
  const std::size_t D = points.front().size();
  if (D == 0) throw ShapeError("gmm_fit: zero-dimensional points");
  require_dims(points, D, "gmm_fit");
  const std::size_t n = points.size();
  const std::size_t K = components;

  // Distinct data points as initial means: the first uniformly, the rest with
  // probability proportional to squared distance from the nearest chosen mean.
  Rng rng(config.seed);
  std::vector<std::size_t> idx{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  taken[idx[0]] = 1;
  while (idx.size() < K) {
    const auto& last = points[idx.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < D; ++d) d2 += (points[i][d] - last[d]) * (points[i][d] - last[d]);
      nearest[i] = std::min(nearest[i], d2);
      if (!taken[i]) total += nearest[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (taken[i] || nearest[i] == 0.0) continue;
        u -= nearest[i];
        if (u < 0.0) pick = i;
      }
      if (pick == n) {  // rounding left u slightly positive
        for (std::size_t i = n; i-- > 0 && pick == n;) {
          if (!taken[i] && nearest[i] > 0.0) pick = i;
        }
      }
    } else {
      // Every remaining point duplicates a chosen mean.
      std::size_t r = std::uniform_int_distribution<std::size_t>(0, n - idx.size() - 1)(rng);
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!taken[i] && r-- == 0) pick = i;
      }
    }
    taken[pick] = 1;
    idx.push_back(pick);
  }
  const Vector gvar = global_variance(points);
  std::vector<Vector> means, vars;
  for (std::size_t k = 0; k < K; ++k) {
    means.push_back(points[idx[k]]);
    vars.push_back(gvar);
  }
  GmmFit fit{GmmModel(std::vector<double>(K, 1.0 / static_cast<double>(K)), std::move(means),
                      std::move(vars)),
             0.0, {}, 0};

  EStep e;
  MStep ms;
  bool converged = false;
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    expectation(fit.model, points, config.policy, e);
    fit.history.push_back(e.total);
    if (iter > 0) {
      const double prev = fit.history[fit.history.size() - 2];
      if ((e.total - prev) < config.tol * std::max(std::abs(prev), 1e-300)) {
        converged = true;
        break;
      }
    }
    maximization(points, e, K, config.policy, ms);

    std::vector<double> weights(K);
    for (std::size_t k = 0; k < K; ++k) weights[k] = ms.mass[k] / static_cast<double>(n);
    for (std::size_t k = 0; k < K; ++k) {
      if (ms.mass[k] > 1e-10) continue;
      // Empty component: restart it at the worst-explained point.
      const auto worst = static_cast<std::size_t>(
          std::min_element(e.point_ll.begin(), e.point_ll.end()) - e.point_ll.begin());
      ms.means[k] = points[worst];
      ms.variances[k] = gvar;
      weights[k] = 1.0 / static_cast<double>(n);
      e.point_ll[worst] = std::numeric_limits<double>::infinity();
      ++fit.reseeded_components;
    }
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= wsum;
    fit.model = GmmModel(std::move(weights), ms.means, ms.variances);
  }
  if (!converged) {
    expectation(fit.model, points, config.policy, e);
    fit.history.push_back(e.total);
  }
  fit.log_likelihood = e.total;
  return fit;
}

double gmm_log_density(const GmmModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw ShapeError("gmm_log_density: point has " + std::to_string(x.size()) +
                     " dims, model has " + std::to_string(model.dim()));
  }
  return log_density_impl(model, component_constants(model), x, nullptr);
}

double mean_log_density(const GmmModel& model, std::span<const AggregatedPoint> points,
                        ExecPolicy policy) {
  if (points.empty()) throw Error("mean_log_density: empty point set");
  require_dims(points, model.dim(), "mean_log_density");
  const auto constants = component_constants(model);
  std::vector<double> ll(points.size());
  parallel_for(points.size(), policy, [&](std::size_t i) {
    ll[i] = log_density_impl(model, constants, points[i], nullptr);
  });
  double sum = 0.0;
  for (double v : ll) sum += v;
  return sum / static_cast<double>(points.size());
}

double empirical_symmetric_kl(const GmmModel& model_a, std::span<const AggregatedPoint> points_a,
                              const GmmModel& model_b, std::span<const AggregatedPoint> points_b,
                              ExecPolicy policy) {
  if (points_a.empty() || points_b.empty()) {
    throw Error("empirical_symmetric_kl: empty point set");
  }
  if (model_a.dim() != model_b.dim()) throw ShapeError("empirical_symmetric_kl: model dims differ");

  // Mean of log p(x) - log q(x) over one point set, differences taken per point.
  auto directed = [&](const GmmModel& p, const GmmModel& q, std::span<const AggregatedPoint> xs) {
    require_dims(xs, p.dim(), "empirical_symmetric_kl");
    const auto cp = component_constants(p);
    const auto cq = component_constants(q);
    std::vector<double> diff(xs.size());
    parallel_for(xs.size(), policy, [&](std::size_t i) {
      diff[i] = log_density_impl(p, cp, xs[i], nullptr) - log_density_impl(q, cq, xs[i], nullptr);
    });
    double sum = 0.0;
    for (double v : diff) sum += v;
    return sum / static_cast<double>(xs.size());
  };
  return directed(model_a, model_b, points_a) + directed(model_b, model_a, points_b);
}

const char* to_string(SplitSet set) {
  return set == SplitSet::development ? "development" : "evaluation";
}

std::vector<SplitCandidate> generate_candidates(const ClassRecordings& classes,
                                                std::size_t dev_target, std::size_t eval_target,
                                                std::size_t n_candidates, Rng& rng,
                                                std::size_t retry_cap) {
  for (const auto& [label, recordings] : classes) {
    std::vector<std::size_t> sizes;
    for (const auto& [rec, segs] : recordings) sizes.push_back(segs.size());
    if (!split_feasible(sizes, dev_target, eval_target)) {
      throw Error("class '" + label + "': cannot fill " + std::to_string(dev_target) +
                  " development and " + std::to_string(eval_target) +
                  " evaluation segments with whole recordings");
    }
  }

  const double p_dev =
      static_cast<double>(dev_target) / static_cast<double>(dev_target + eval_target);
  std::vector<SplitCandidate> out;
  out.reserve(n_candidates);
  for (std::size_t c = 0; c < n_candidates; ++c) {
    SplitCandidate cand;
    for (const auto& [label, recordings] : classes) {
      auto& assignment = cand.recording_set[label];
      bool placed = false;
      for (std::size_t attempt = 0; attempt < retry_cap && !placed; ++attempt) {
        assignment.clear();
        std::size_t dev_count = 0, eval_count = 0;
        for (const auto& [rec, segs] : recordings) {
          const bool dev = uniform01(rng) < p_dev;
          assignment[rec] = dev ? SplitSet::development : SplitSet::evaluation;
          (dev ? dev_count : eval_count) += segs.size();
        }
        placed = dev_count >= dev_target && eval_count >= eval_target;
      }
      if (!placed) {
        throw Error("class '" + label + "': no valid recording assignment after " +
                    std::to_string(retry_cap) + " attempts");
      }
      std::vector<std::string> dev_pool, eval_pool;
      for (const auto& [rec, segs] : recordings) {
        auto& pool = assignment[rec] == SplitSet::development ? dev_pool : eval_pool;
        pool.insert(pool.end(), segs.begin(), segs.end());
      }
      std::shuffle(dev_pool.begin(), dev_pool.end(), rng);
      std::shuffle(eval_pool.begin(), eval_pool.end(), rng);
      cand.development.insert(cand.development.end(), dev_pool.begin(),
                              dev_pool.begin() + static_cast<std::ptrdiff_t>(dev_target));
      cand.evaluation.insert(cand.evaluation.end(), eval_pool.begin(),
                             eval_pool.begin() + static_cast<std::ptrdiff_t>(eval_target));
    }
    out.push_back(std::move(cand));
  }
  return out;
}

BalancedSelection select_balanced_split(std::span<const SplitCandidate> candidates,
                                        const CandidateScorer& scorer, Rng& rng,
                                        ExecPolicy policy) {
  if (candidates.size() < 4) throw Error("select_balanced_split needs at least 4 candidates");
  BalancedSelection sel;
  sel.scores.resize(candidates.size());
  parallel_for(candidates.size(), policy, [&](std::size_t i) {
    double s = 0.0;
    try {
      s = scorer(candidates[i], i);
    } catch (const std::exception& e) {
      throw Error("candidate " + std::to_string(i) + ": " + e.what());
    }
    if (std::isnan(s)) throw Error("candidate " + std::to_string(i) + ": score is NaN");
    sel.scores[i] = s;
  });

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sel.scores[a] < sel.scores[b]; });
  const std::size_t keep = (candidates.size() + 3) / 4;
  sel.top.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  sel.index = sel.top[std::uniform_int_distribution<std::size_t>(0, keep - 1)(rng)];
  return sel;
}

CandidateScorer make_divergence_scorer(
    const std::map<std::string, std::vector<AggregatedPoint>>& points_by_segment,
    std::size_t components, GmmFitConfig config) {
  // Candidates are scored concurrently; each EM runs serially inside.
  config.policy = ExecPolicy::serial;
  return [&points_by_segment, components, config](const SplitCandidate& cand,
                                                  std::size_t index) {
    auto pool = [&](const std::vector<std::string>& ids) {
      std::vector<AggregatedPoint> out;
      for (const auto& id : ids) {
        auto it = points_by_segment.find(id);
        if (it == points_by_segment.end()) throw Error("no features for segment '" + id + "'");
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
      return out;
    };
    const auto dev = pool(cand.development);
    const auto eval = pool(cand.evaluation);
    GmmFitConfig c = config;
    c.seed = config.seed + index;
    const auto dev_fit = gmm_fit(dev, components, c);
    const auto eval_fit = gmm_fit(eval, components, c);
    return empirical_symmetric_kl(dev_fit.model, dev, eval_fit.model, eval, ExecPolicy::serial);
  };
}

void write_split_manifest(const SplitCandidate& candidate, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, {"segment_id", "set"});
  for (const auto& id : candidate.development) csv::write_row(out, {id, "development"});
  for (const auto& id : candidate.evaluation) csv::write_row(out, {id, "evaluation"});
  csv::write_text(path, out.str());
}

void write_candidate_report(const BalancedSelection& selection,
                            const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, {"candidate", "score", "selected"});
  for (std::size_t i = 0; i < selection.scores.size(); ++i) {
    csv::write_row(out, {std::to_string(i), csv::format_double(selection.scores[i]),
                         i == selection.index ? "1" : "0"});
  }
  csv::write_text(path, out.str());
}

}  // namespace asc
