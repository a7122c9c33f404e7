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

#include "asc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asc/csv.hpp"
#include "asc/error.hpp"

namespace asc {

namespace {

double row_mean(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) sum += v;
  return sum / static_cast<double>(row.size());
}

}  // namespace

Vector temporal_average(const FeatureMatrix& m) {
  Vector out(m.rows());
  for (std::size_t f = 0; f < m.rows(); ++f) out[f] = row_mean(m.row(f));
  return out;
}

FeatureMatrix background_subtract(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (std::size_t f = 0; f < m.rows(); ++f) {
    const double mean = row_mean(m.row(f));
    for (double& v : out.row(f)) v -= mean;
  }
  return out;
}

StandardizerStats fit_standardizer(std::span<const FeatureMatrix> train) {
  if (train.empty()) throw Error("fit_standardizer: empty training list");
  const std::size_t bins = train.front().rows();
  std::size_t frames = 0;
  for (const auto& m : train) {
    if (m.rows() != bins) {
      throw ShapeError("fit_standardizer: expected " + std::to_string(bins) +
                       " frequency bins, got " + std::to_string(m.rows()));
    }
    frames += m.cols();
  }

  StandardizerStats stats;
  stats.means.assign(bins, 0.0);
  stats.stds.assign(bins, 0.0);
  const double n = static_cast<double>(frames);
  for (std::size_t f = 0; f < bins; ++f) {
    double sum = 0.0;
    for (const auto& m : train) {
      for (double v : m.row(f)) sum += v;
    }
    const double mean = sum / n;
    // Two-pass variance.
    double ss = 0.0;
    for (const auto& m : train) {
      for (double v : m.row(f)) ss += (v - mean) * (v - mean);
    }
    stats.means[f] = mean;
    stats.stds[f] = std::max(std::sqrt(ss / n), StandardizerStats::kStdFloor);
  }
  return stats;
}

FeatureMatrix apply_standardizer(const StandardizerStats& stats, const FeatureMatrix& m) {
  if (m.rows() != stats.bins()) {
    throw ShapeError("apply_standardizer: matrix has " + std::to_string(m.rows()) +
                     " bins, stats have " + std::to_string(stats.bins()));
  }
  FeatureMatrix out = m;
  for (std::size_t f = 0; f < m.rows(); ++f) {
    for (double& v : out.row(f)) v = (v - stats.means[f]) / stats.stds[f];
  }
  return out;
}

void write_standardizer(const StandardizerStats& stats, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::write_row(out, {"bin", "mean", "std"});
  for (std::size_t f = 0; f < stats.bins(); ++f) {
    csv::write_row(out, {std::to_string(f), csv::format_double(stats.means[f]),
                         csv::format_double(stats.stds[f])});
  }
  csv::write_text(path, out.str());
}

StandardizerStats read_standardizer(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header != csv::Row{"bin", "mean", "std"}) {
    throw Error(path.string() + ": expected header bin,mean,std");
  }
  StandardizerStats stats;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row[0] != std::to_string(i)) throw Error(path.string() + ": bins out of order");
    stats.means.push_back(csv::parse_double(row[1], path.string()));
    stats.stds.push_back(
        std::max(csv::parse_double(row[2], path.string()), StandardizerStats::kStdFloor));
  }
  return stats;
}

}  // namespace asc
