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
#include <span>
#include <string>
#include <vector>

#include "asc/augment.hpp"
#include "asc/data.hpp"
#include "asc/parallel.hpp"
#include "asc/rng.hpp"

namespace asc {

/// Softmax output: length C, non-negative, sums to one.
using ProbabilityVector = std::vector<double>;

enum class Architecture : std::uint8_t { linear = 0, mlp = 1 };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

/// Softmax regression or a one-hidden-layer tanh perceptron.
///
/// All parameters live in one flat vector so the optimizer, the gradient
/// check and the serializer can treat them uniformly:
///   linear: W[C x P], b[C]
///   mlp:    W1[H x P], b1[H], W2[C x H], b2[C]
class ClassifierModel {
 public:
  /// All parameters zero.
  ClassifierModel(Architecture arch, std::size_t input_dim, std::size_t class_count,
                  std::size_t hidden_units = 0);

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static ClassifierModel initialized(Architecture arch, std::size_t input_dim,
                                     std::size_t class_count, std::size_t hidden_units,
                                     Rng& rng);

  Architecture architecture() const noexcept { return arch_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t class_count() const noexcept { return class_count_; }
  std::size_t hidden_units() const noexcept { return hidden_units_; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// True for entries that are weights (decayed), false for biases.
  bool is_weight(std::size_t index) const;

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;

 private:
  friend struct ModelLayout;

  Architecture arch_;
  std::size_t input_dim_;
  std::size_t class_count_;
  std::size_t hidden_units_;
  std::vector<double> params_;
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double base_lr = 0.05;
  double max_lr = 0.5;
  std::size_t clr_step_size = 200;  // iterations per half cycle
  bool clr_enabled = false;
  double momentum = 0.0;
  double weight_decay = 0.0;  // l2 coefficient on weights
  double dropout_rate = 0.0;  // hidden activations only
  std::uint64_t seed = 0;

  void validate() const;
};

/// Triangular cyclic learning rate; base_lr when cycling is disabled.
double clr_learning_rate(std::size_t iteration, const TrainConfig& config);

ProbabilityVector forward(const ClassifierModel& model, std::span<const double> x);

/// -sum_c target[c] * log(max(pred[c], 1e-12)).
double cross_entropy(std::span<const double> pred, std::span<const double> target);

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};

/// Mean cross entropy over the batch plus weight_decay/2 * ||weights||^2,
/// with its analytic gradient. Dropout is not applied.
LossAndGradient loss_and_gradient(const ClassifierModel& model, std::span<const Example> batch,
                                  double weight_decay = 0.0);
double batch_loss(const ClassifierModel& model, std::span<const Example> batch,
                  double weight_decay = 0.0);

/// Max over parameters of |g_a - g_n| / max(|g_a| + |g_n|, 1e-8), with g_n
/// from central differences at h = 1e-5.
double gradient_check(const ClassifierModel& model, std::span<const Example> batch,
                      double weight_decay = 0.0);

/// Transforms a freshly drawn mini-batch before the gradient step. Receives
/// its own stream so that toggling augmentation leaves the shuffle, init and
/// dropout streams untouched.
using BatchAugmenter = std::function<std::vector<Example>(std::vector<Example>, Rng&)>;

struct TrainResult {
  ClassifierModel model;
  std::vector<double> loss_history;  // mean mini-batch loss per epoch
};

/// Mini-batch SGD. Deterministic for a given config.seed.
TrainResult train(ClassifierModel model, std::span<const Example> data,
                  const TrainConfig& config, const BatchAugmenter& augment = {});

std::vector<ProbabilityVector> predict_batch(const ClassifierModel& model,
                                             std::span<const Vector> features,
                                             ExecPolicy policy = ExecPolicy::parallel);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// ASCM: "ASCM", u16 version, u8 architecture, u32 input dim, u32 classes,
/// u32 hidden units, then every parameter as f64 little-endian.
std::vector<unsigned char> encode_model(const ClassifierModel& model);
ClassifierModel decode_model(std::span<const unsigned char> bytes);
void write_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel read_model(const std::filesystem::path& path);

}  // namespace asc
