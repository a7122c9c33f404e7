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

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "asc/csv.hpp"
#include "asc/data.hpp"
#include "asc/rng.hpp"

namespace asc::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("asc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Values drawn as float32 so they survive the on-disk format exactly.
inline FeatureMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                                   double low = -10.0, double high = 10.0) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = static_cast<float>(uniform(rng, low, high));
  return FeatureMatrix(rows, cols, std::move(v));
}

inline Vector random_vector(Rng& rng, std::size_t n, double low = -1.0, double high = 1.0) {
  Vector v(n);
  for (auto& x : v) x = uniform(rng, low, high);
  return v;
}

inline std::size_t random_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Writes n rows x cols feature files whose bins carry a class-specific
// offset, plus a manifest. Locations cycle over `locations`; each segment is
// its own recording. Returns the manifest path.
inline std::filesystem::path write_blob_corpus(const std::filesystem::path& dir,
                                               const std::string& name, std::size_t n,
                                               std::size_t classes, std::size_t rows,
                                               std::size_t cols, std::uint64_t seed,
                                               bool labeled = true, std::size_t locations = 10) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::filesystem::create_directories(dir / name);
  std::string manifest = "segment_id,recording_id,location_id,scene_label,feature_path\n";
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % classes;
    std::vector<double> v(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const double offset = (r % classes == cls) ? 1.5 : 0.0;
      for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = static_cast<float>(offset + noise(rng));
    }
    const std::string id = name + "_" + std::to_string(i);
    const std::string file = name + "/" + id + ".ascf";
    write_feature_matrix(FeatureMatrix(rows, cols, std::move(v)), dir / file);
    manifest += id + "," + id + "_rec,loc" + std::to_string(i % locations) + "," +
                (labeled ? "class" + std::to_string(cls) : std::string()) + "," + file + "\n";
  }
  const auto path = dir / (name + ".csv");
  csv::write_text(path, manifest);
  return path;
}

}  // namespace asc::test
