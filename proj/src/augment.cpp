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

#include "asc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "asc/error.hpp"

namespace asc {

namespace {

constexpr int kRectRetries = 100;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string("mixup: ") + what + " dimension mismatch (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

std::size_t uniform_index(Rng& rng, std::size_t low, std::size_t high) {
  return std::uniform_int_distribution<std::size_t>(low, high)(rng);
}

}  // namespace

MixupConfig::MixupConfig(double alpha, std::uint64_t seed) : alpha_(alpha), seed_(seed) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("mixup alpha must be a positive finite number");
  }
}

void EraseConfig::validate() const {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw ConfigError("erase probability must lie in [0, 1]");
  }
  if (!(area_low > 0.0 && area_low <= area_high && area_high <= 1.0)) {
    throw ConfigError("erase area bounds must satisfy 0 < low <= high <= 1");
  }
  if (!(aspect_low > 0.0 && aspect_low <= aspect_high)) {
    throw ConfigError("erase aspect bounds must satisfy 0 < low <= high");
  }
  if (!std::isfinite(fill_value)) throw ConfigError("erase fill value must be finite");
}

double sample_lambda(const MixupConfig& config, Rng& rng) {
  // Beta(a, a) as X / (X + Y) with X, Y ~ Gamma(a, 1).
  std::gamma_distribution<double> gamma(config.alpha(), 1.0);
  for (;;) {
    const double x = gamma(rng);
    const double y = gamma(rng);
    const double sum = x + y;
    if (sum > 0.0) return std::clamp(x / sum, 0.0, 1.0);
  }
}

MixedSample mixup(std::span<const double> x_i, std::span<const double> y_i,
                  std::span<const double> x_j, std::span<const double> y_j, double lambda) {
  require_same_size(x_i.size(), x_j.size(), "feature");
  require_same_size(y_i.size(), y_j.size(), "target");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw RangeError("mixup lambda must lie in [0, 1]");
  const double mu = 1.0 - lambda;
  MixedSample out;
  out.features.resize(x_i.size());
  for (std::size_t p = 0; p < x_i.size(); ++p) out.features[p] = lambda * x_i[p] + mu * x_j[p];
  out.target.resize(y_i.size());
  for (std::size_t c = 0; c < y_i.size(); ++c) out.target[c] = lambda * y_i[c] + mu * y_j[c];
  return out;
}

FeatureMatrix mixup(const FeatureMatrix& x_i, const FeatureMatrix& x_j, double lambda) {
  if (x_i.rows() != x_j.rows() || x_i.cols() != x_j.cols()) {
    throw ShapeError("mixup: feature matrices differ in shape");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw RangeError("mixup lambda must lie in [0, 1]");
  const double mu = 1.0 - lambda;
  std::vector<double> v(x_i.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = lambda * x_i.values()[k] + mu * x_j.values()[k];
  }
  return FeatureMatrix(x_i.rows(), x_i.cols(), std::move(v));
}

std::vector<MixedSample> mixup_batch(std::span<const Example> batch, const MixupConfig& config,
                                     Rng& rng) {
  if (batch.size() < 2) throw Error("mixup_batch needs at least 2 samples");
  std::vector<std::size_t> perm(batch.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<MixedSample> out;
  out.reserve(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double lambda = sample_lambda(config, rng);
    const Example& a = batch[k];
    const Example& b = batch[perm[k]];
    out.push_back(mixup(a.features, a.target, b.features, b.target, lambda));
  }
  return out;
}

std::optional<EraseRect> sample_erase_rect(std::size_t rows, std::size_t cols,
                                           const EraseConfig& config, Rng& rng) {
  config.validate();
  if (uniform01(rng) >= config.probability) return std::nullopt;

  const double total = static_cast<double>(rows * cols);
  const double min_cells = config.area_low * total;
  const double max_cells = config.area_high * total;
  std::size_t h = 1;
  std::size_t w = 1;
  for (int attempt = 0; attempt < kRectRetries; ++attempt) {
    const double area = uniform(rng, config.area_low, config.area_high) * total;
    const double aspect = uniform(rng, config.aspect_low, config.aspect_high);
    h = static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(area * aspect))));
    w = static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(area / aspect))));
    const auto cells = static_cast<double>(h * w);
    if (h <= rows && w <= cols && cells >= min_cells && cells <= max_cells) {
      const std::size_t top = uniform_index(rng, 0, rows - h);
      const std::size_t left = uniform_index(rng, 0, cols - w);
      return EraseRect{top, left, h, w};
    }
  }

  // Fallback: clip the last draw to the grid, grow it back toward the lower
  // area bound, then shrink the longer side until the upper bound holds.
  h = std::min(h, rows);
  w = std::min(w, cols);
  if (static_cast<double>(h * w) < min_cells) {
    h = std::min(rows, static_cast<std::size_t>(std::ceil(min_cells / static_cast<double>(w))));
  }
  if (static_cast<double>(h * w) < min_cells) {
    w = std::min(cols, static_cast<std::size_t>(std::ceil(min_cells / static_cast<double>(h))));
  }
  while (h * w > 1 && static_cast<double>(h * w) > max_cells) {
    if (h >= w) --h; else --w;
  }
  const std::size_t top = uniform_index(rng, 0, rows - h);
  const std::size_t left = uniform_index(rng, 0, cols - w);
  return EraseRect{top, left, h, w};
}

void fill_rect(FeatureMatrix& m, const EraseRect& rect, double value) {
  if (rect.top + rect.height > m.rows() || rect.left + rect.width > m.cols()) {
    throw ShapeError("erase rectangle exceeds matrix bounds");
  }
  for (std::size_t r = rect.top; r < rect.top + rect.height; ++r) {
    auto row = m.row(r);
    std::fill(row.begin() + static_cast<std::ptrdiff_t>(rect.left),
              row.begin() + static_cast<std::ptrdiff_t>(rect.left + rect.width), value);
  }
}

FeatureMatrix random_erase(const FeatureMatrix& m, const EraseConfig& config, Rng& rng) {
  FeatureMatrix out = m;
  if (auto rect = sample_erase_rect(m.rows(), m.cols(), config, rng)) {
    fill_rect(out, *rect, config.fill_value);
  }
  return out;
}

}  // namespace asc
