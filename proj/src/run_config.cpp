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

#include "asc/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "asc/csv.hpp"
#include "asc/error.hpp"

namespace asc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::vector<ConfigKey>& RunConfig::keys() {
  static const std::vector<ConfigKey> k = {
      {"seed", "0", "root seed; every stage derives its own stream from it"},
      {"train_manifest", "", "labeled development manifest CSV"},
      {"test_manifest", "", "held-out manifest CSV (labels optional)"},
      {"unlabeled_manifest", "", "manifest of unlabeled segments for pseudo-labeling"},
      {"out_dir", "", "output directory; nothing is written outside it"},
      {"model", "linear", "classifier: linear | mlp"},
      {"hidden_units", "32", "hidden units for mlp"},
      {"epochs", "30", "training epochs"},
      {"batch_size", "32", "mini-batch size"},
      {"base_lr", "0.01", "learning rate (lower bound when clr is on)"},
      {"max_lr", "0.1", "upper learning rate for clr"},
      {"clr", "false", "cyclic (triangular) learning rate"},
      {"clr_step_size", "200", "iterations per half cycle"},
      {"momentum", "0", "SGD momentum"},
      {"weight_decay", "0.0001", "l2 penalty on weights"},
      {"dropout", "0", "dropout on mlp hidden activations"},
      {"mixup", "false", "mixup augmentation"},
      {"mixup_alpha", "0.2", "Beta(alpha, alpha) shape"},
      {"random_erasing", "false", "random erasing augmentation"},
      {"erase_probability", "0.5", "probability of erasing one rectangle"},
      {"erase_area_low", "0.02", "minimum erased fraction of cells"},
      {"erase_area_high", "0.33", "maximum erased fraction of cells"},
      {"erase_aspect_low", "0.3", "minimum rectangle height/width"},
      {"erase_aspect_high", "3.3", "maximum rectangle height/width"},
      {"erase_fill", "0", "value written into erased cells"},
      {"preprocess", "raw", "feature variant: raw | temporal | bsub"},
      {"standardize", "true", "per-bin standardization fitted on training data"},
      {"folds", "5", "K for k-fold training"},
      {"group_key", "location", "fold grouping: location | recording"},
      {"fusion", "average", "fusion rule: average | majority"},
      {"ssl_threshold", "0.5", "pseudo-label confidence threshold (strict)"},
      {"ssl_rounds", "3", "pseudo-labeling rounds"},
      {"ablation_mode", "table1", "ablation table: table1 | table3"},
      {"balance_window", "50", "aggregation window in frames"},
      {"balance_hop", "25", "aggregation hop in frames"},
      {"balance_components", "32", "GMM components per set"},
      {"balance_candidates", "100", "number of random split candidates"},
      {"balance_dev_target", "300", "development segments per class"},
      {"balance_eval_target", "100", "evaluation segments per class"},
      {"gmm_max_iters", "100", "EM iteration cap"},
      {"gmm_tol", "1e-6", "EM relative log-likelihood tolerance"},
      {"eval_ratio", "0.5", "public share of the evaluation set"},
      {"submission_limit", "2", "accepted submissions per team per UTC day"},
  };
  return k;
}

bool RunConfig::is_key(const std::string& name) {
  const auto& k = keys();
  return std::any_of(k.begin(), k.end(), [&](const ConfigKey& c) { return c.name == name; });
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!is_key(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

void RunConfig::merge_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    try {
      set(key, trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string());
}

std::string RunConfig::render() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return csv::parse_double(get(key), key);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return static_cast<std::size_t>(get_u64(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& s = get(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.epochs = get_size("epochs");
  c.batch_size = get_size("batch_size");
  c.base_lr = get_double("base_lr");
  c.max_lr = get_double("max_lr");
  c.clr_enabled = get_bool("clr");
  c.clr_step_size = get_size("clr_step_size");
  c.momentum = get_double("momentum");
  c.weight_decay = get_double("weight_decay");
  c.dropout_rate = get_double("dropout");
  c.seed = get_u64("seed");
  c.validate();
  return c;
}

MixupConfig RunConfig::mixup_config() const {
  return MixupConfig(get_double("mixup_alpha"), get_u64("seed"));
}

EraseConfig RunConfig::erase_config() const {
  EraseConfig c;
  c.probability = get_double("erase_probability");
  c.area_low = get_double("erase_area_low");
  c.area_high = get_double("erase_area_high");
  c.aspect_low = get_double("erase_aspect_low");
  c.aspect_high = get_double("erase_aspect_high");
  c.fill_value = get_double("erase_fill");
  c.seed = get_u64("seed");
  c.validate();
  return c;
}

SslConfig RunConfig::ssl_config() const {
  SslConfig c;
  c.threshold = get_double("ssl_threshold");
  c.rounds = get_size("ssl_rounds");
  c.validate();
  return c;
}

GmmFitConfig RunConfig::gmm_config() const {
  GmmFitConfig c;
  c.max_iters = get_size("gmm_max_iters");
  c.tol = get_double("gmm_tol");
  c.seed = derive_seed(get_u64("seed"), "balance:gmm");
  return c;
}

}  // namespace asc
