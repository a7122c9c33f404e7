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
#include <optional>
#include <span>
#include <vector>

#include "asc/data.hpp"
#include "asc/rng.hpp"

namespace asc {

/// Beta(alpha, alpha) mixing configuration.
class MixupConfig {
 public:
  explicit MixupConfig(double alpha = 0.2, std::uint64_t seed = 0);

  double alpha() const noexcept { return alpha_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  double alpha_;
  std::uint64_t seed_;
};

/// Random-erasing configuration. Areas are fractions of the total cell count;
/// aspect is height / width.
struct EraseConfig {
  double probability = 0.5;
  double area_low = 0.02;
  double area_high = 0.33;
  double aspect_low = 0.3;
  double aspect_high = 3.3;
  double fill_value = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError if bounds are out of order or out of range.
  void validate() const;
};

struct Example {
  Vector features;
  SoftTarget target;
};

/// Output of mixup: interpolated features and soft target.
using MixedSample = Example;

double sample_lambda(const MixupConfig& config, Rng& rng);

/// x = lambda * x_i + (1 - lambda) * x_j, and the same for targets.
MixedSample mixup(std::span<const double> x_i, std::span<const double> y_i,
                  std::span<const double> x_j, std::span<const double> y_j, double lambda);

/// Matrix form. Both inputs must share a shape; the result keeps it.
FeatureMatrix mixup(const FeatureMatrix& x_i, const FeatureMatrix& x_j, double lambda);

/// Pairs element k with element perm(k) of a uniform random permutation
/// (self-pairs allowed) and draws one lambda per pair.
std::vector<MixedSample> mixup_batch(std::span<const Example> batch, const MixupConfig& config,
                                     Rng& rng);

struct EraseRect {
  std::size_t top;
  std::size_t left;
  std::size_t height;
  std::size_t width;

  bool contains(std::size_t r, std::size_t c) const {
    return r >= top && r < top + height && c >= left && c < left + width;
  }
  std::size_t area() const { return height * width; }

  friend bool operator==(const EraseRect&, const EraseRect&) = default;
};

/// Draws the erase decision and rectangle for a rows x cols grid; nullopt when
/// the probability draw says not to erase. random_erase consumes the rng in
/// exactly this way.
std::optional<EraseRect> sample_erase_rect(std::size_t rows, std::size_t cols,
                                           const EraseConfig& config, Rng& rng);

void fill_rect(FeatureMatrix& m, const EraseRect& rect, double value);

FeatureMatrix random_erase(const FeatureMatrix& m, const EraseConfig& config, Rng& rng);

}  // namespace asc
