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

#include <filesystem>
#include <span>
#include <vector>

#include "asc/data.hpp"

namespace asc {

/// Per-frequency-bin mean over time: F x T -> length F.
Vector temporal_average(const FeatureMatrix& m);

/// Removes each bin's own temporal mean, so every output row has mean zero.
FeatureMatrix background_subtract(const FeatureMatrix& m);

struct StandardizerStats {
  static constexpr double kStdFloor = 1e-6;

  Vector means;
  Vector stds;

  std::size_t bins() const noexcept { return means.size(); }
};

/// Per-bin mean and population std pooled over every frame of every matrix.
StandardizerStats fit_standardizer(std::span<const FeatureMatrix> train);

FeatureMatrix apply_standardizer(const StandardizerStats& stats, const FeatureMatrix& m);

/// CSV with header `bin,mean,std`.
void write_standardizer(const StandardizerStats& stats, const std::filesystem::path& path);
StandardizerStats read_standardizer(const std::filesystem::path& path);

}  // namespace asc
