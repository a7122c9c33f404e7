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
#include <map>
#include <string>
#include <vector>

#include "asc/augment.hpp"
#include "asc/balance.hpp"
#include "asc/model.hpp"
#include "asc/ssl.hpp"

namespace asc {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Flat key = value settings. Only registered keys are accepted.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<ConfigKey>& keys();
  static bool is_key(const std::string& name);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  /// Parses `key = value` lines; blank lines and `#` comments are skipped.
  void merge_text(const std::string& text, const std::string& source = "<config>");
  void merge_file(const std::filesystem::path& path);

  /// One `key = value` line per key, sorted by key.
  std::string render() const;

  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  TrainConfig train_config() const;
  MixupConfig mixup_config() const;
  EraseConfig erase_config() const;
  SslConfig ssl_config() const;
  GmmFitConfig gmm_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace asc
