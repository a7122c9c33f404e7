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

#include "asc/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "asc/error.hpp"

namespace asc {

struct ModelLayout {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;

  explicit ModelLayout(const ClassifierModel& m)
      : ModelLayout(m.arch_, m.input_dim_, m.class_count_, m.hidden_units_) {}

  ModelLayout(Architecture arch, std::size_t p, std::size_t c, std::size_t h) {
    if (arch == Architecture::linear) {
      w1 = 0;
      b1 = c * p;
      total = b1 + c;
    } else {
      w1 = 0;
      b1 = h * p;
      w2 = b1 + h;
      b2 = w2 + c * h;
      total = b2 + c;
    }
  }
};

namespace {

constexpr double kProbEpsilon = 1e-12;
constexpr double kFiniteDiffStep = 1e-5;

void softmax_in_place(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void require_input(const ClassifierModel& model, std::size_t dim) {
  if (dim != model.input_dim()) {
    throw ShapeError("model expects " + std::to_string(model.input_dim()) +
                     " features, got " + std::to_string(dim));
  }
}

// Mean batch loss; adds its gradient into *grad when grad is non-null.
// dropout_rng is only consulted for mlp models with dropout_rate > 0.
double accumulate(const ClassifierModel& model, std::span<const Example> batch,
                  double weight_decay, double dropout_rate, Rng* dropout_rng, Vector* grad) {
  if (batch.empty()) throw Error("empty batch");
  const ModelLayout L(model);
  const auto theta = model.parameters();
  const std::size_t P = model.input_dim();
  const std::size_t C = model.class_count();
  const std::size_t H = model.hidden_units();
  const bool mlp = model.architecture() == Architecture::mlp;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const bool use_dropout = mlp && dropout_rate > 0.0 && dropout_rng != nullptr;
  const double keep_scale = use_dropout ? 1.0 / (1.0 - dropout_rate) : 1.0;

  Vector hidden(H), mask(H, 1.0), dropped(H), z(C), dz(C);
  double loss = 0.0;
  for (const Example& ex : batch) {
    require_input(model, ex.features.size());
    if (ex.target.size() != C) {
      throw ShapeError("target has " + std::to_string(ex.target.size()) +
                       " classes, model has " + std::to_string(C));
    }
    const auto& x = ex.features;
    std::span<const double> top_input = x;
    std::size_t top_dim = P;
    const double* w_top = theta.data() + L.w1;
    const double* b_top = theta.data() + L.b1;

    if (mlp) {
      for (std::size_t j = 0; j < H; ++j) {
        const double* w = theta.data() + L.w1 + j * P;
        double a = theta[L.b1 + j];
        for (std::size_t p = 0; p < P; ++p) a += w[p] * x[p];
        hidden[j] = std::tanh(a);
        if (use_dropout) mask[j] = uniform01(*dropout_rng) < dropout_rate ? 0.0 : keep_scale;
      }
      for (std::size_t j = 0; j < H; ++j) dropped[j] = hidden[j] * mask[j];
      top_input = dropped;
      top_dim = H;
      w_top = theta.data() + L.w2;
      b_top = theta.data() + L.b2;
    }

    for (std::size_t c = 0; c < C; ++c) {
      const double* w = w_top + c * top_dim;
      double s = b_top[c];
      for (std::size_t k = 0; k < top_dim; ++k) s += w[k] * top_input[k];
      z[c] = s;
    }
    softmax_in_place(z);
    loss += cross_entropy(z, ex.target);

    if (!grad) continue;
    auto& g = *grad;
    for (std::size_t c = 0; c < C; ++c) dz[c] = (z[c] - ex.target[c]) * inv_n;
    const std::size_t gw_top = mlp ? L.w2 : L.w1;
    const std::size_t gb_top = mlp ? L.b2 : L.b1;
    for (std::size_t c = 0; c < C; ++c) {
      double* gw = g.data() + gw_top + c * top_dim;
      for (std::size_t k = 0; k < top_dim; ++k) gw[k] += dz[c] * top_input[k];
      g[gb_top + c] += dz[c];
    }
    if (mlp) {
      for (std::size_t j = 0; j < H; ++j) {
        double back = 0.0;
        for (std::size_t c = 0; c < C; ++c) back += theta[L.w2 + c * H + j] * dz[c];
        const double da = back * mask[j] * (1.0 - hidden[j] * hidden[j]);
        double* gw = g.data() + L.w1 + j * P;
        for (std::size_t p = 0; p < P; ++p) gw[p] += da * x[p];
        g[L.b1 + j] += da;
      }
    }
  }
  loss *= inv_n;

  if (weight_decay > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (!model.is_weight(i)) continue;
      sq += theta[i] * theta[i];
      if (grad) (*grad)[i] += weight_decay * theta[i];
    }
    loss += 0.5 * weight_decay * sq;
  }
  return loss;
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::string to_string(Architecture arch) {
  return arch == Architecture::linear ? "linear" : "mlp";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "linear") return Architecture::linear;
  if (name == "mlp") return Architecture::mlp;
  throw ConfigError("unknown model architecture '" + name + "' (expected linear or mlp)");
}

ClassifierModel::ClassifierModel(Architecture arch, std::size_t input_dim,
                                 std::size_t class_count, std::size_t hidden_units)
    : arch_(arch),
      input_dim_(input_dim),
      class_count_(class_count),
      hidden_units_(arch == Architecture::mlp ? hidden_units : 0) {
  if (input_dim == 0 || class_count == 0) {
    throw ShapeError("model needs input_dim >= 1 and class_count >= 1");
  }
  if (arch == Architecture::mlp && hidden_units == 0) {
    throw ShapeError("mlp model needs at least one hidden unit");
  }
  params_.assign(ModelLayout(*this).total, 0.0);
}

ClassifierModel ClassifierModel::initialized(Architecture arch, std::size_t input_dim,
                                             std::size_t class_count,
                                             std::size_t hidden_units, Rng& rng) {
  ClassifierModel m(arch, input_dim, class_count, hidden_units);
  const ModelLayout L(m);
  auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) m.params_[begin + i] = uniform(rng, -bound, bound);
  };
  if (arch == Architecture::linear) {
    fill(L.w1, class_count * input_dim, input_dim);
  } else {
    fill(L.w1, m.hidden_units_ * input_dim, input_dim);
    fill(L.w2, class_count * m.hidden_units_, m.hidden_units_);
  }
  return m;
}

bool ClassifierModel::is_weight(std::size_t index) const {
  const ModelLayout L(*this);
  if (arch_ == Architecture::linear) return index < L.b1;
  return index < L.b1 || (index >= L.w2 && index < L.b2);
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(base_lr > 0.0) || !(max_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (base_lr > max_lr) throw ConfigError("base_lr must not exceed max_lr");
  if (clr_enabled && clr_step_size < 1) throw ConfigError("clr_step_size must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

double clr_learning_rate(std::size_t iteration, const TrainConfig& config) {
  if (!config.clr_enabled) return config.base_lr;
  const double t = static_cast<double>(iteration);
  const double step = static_cast<double>(config.clr_step_size);
  const double cycle = std::floor(1.0 + t / (2.0 * step));
  const double x = std::abs(t / step - 2.0 * cycle + 1.0);
  return config.base_lr + (config.max_lr - config.base_lr) * std::max(0.0, 1.0 - x);
}

ProbabilityVector forward(const ClassifierModel& model, std::span<const double> x) {
  require_input(model, x.size());
  const ModelLayout L(model);
  const auto theta = model.parameters();
  const std::size_t P = model.input_dim();
  const std::size_t C = model.class_count();

  Vector hidden;
  std::span<const double> input = x;
  std::size_t dim = P;
  std::size_t w_top = L.w1, b_top = L.b1;
  if (model.architecture() == Architecture::mlp) {
    const std::size_t H = model.hidden_units();
    hidden.resize(H);
    for (std::size_t j = 0; j < H; ++j) {
      double a = theta[L.b1 + j];
      for (std::size_t p = 0; p < P; ++p) a += theta[L.w1 + j * P + p] * x[p];
      hidden[j] = std::tanh(a);
    }
    input = hidden;
    dim = H;
    w_top = L.w2;
    b_top = L.b2;
  }
  ProbabilityVector z(C);
  for (std::size_t c = 0; c < C; ++c) {
    double s = theta[b_top + c];
    for (std::size_t k = 0; k < dim; ++k) s += theta[w_top + c * dim + k] * input[k];
    z[c] = s;
  }
  softmax_in_place(z);
  return z;
}

double cross_entropy(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeError("cross_entropy: size mismatch");
  double loss = 0.0;
  for (std::size_t c = 0; c < pred.size(); ++c) {
    if (target[c] != 0.0) loss -= target[c] * std::log(std::max(pred[c], kProbEpsilon));
  }
  return loss;
}

LossAndGradient loss_and_gradient(const ClassifierModel& model, std::span<const Example> batch,
                                  double weight_decay) {
  LossAndGradient out;
  out.gradient.assign(model.parameters().size(), 0.0);
  out.loss = accumulate(model, batch, weight_decay, 0.0, nullptr, &out.gradient);
  return out;
}

double batch_loss(const ClassifierModel& model, std::span<const Example> batch,
                  double weight_decay) {
  return accumulate(model, batch, weight_decay, 0.0, nullptr, nullptr);
}

double gradient_check(const ClassifierModel& model, std::span<const Example> batch,
                      double weight_decay) {
  const Vector analytic = loss_and_gradient(model, batch, weight_decay).gradient;
  ClassifierModel probe = model;
  auto theta = probe.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + kFiniteDiffStep;
    const double up = batch_loss(probe, batch, weight_decay);
    theta[i] = saved - kFiniteDiffStep;
    const double down = batch_loss(probe, batch, weight_decay);
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * kFiniteDiffStep);
    const double denom = std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-8);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

TrainResult train(ClassifierModel model, std::span<const Example> data,
                  const TrainConfig& config, const BatchAugmenter& augment) {
  config.validate();
  TrainResult result{std::move(model), {}};
  if (config.epochs == 0) return result;
  if (data.empty()) throw Error("train: empty training set");

  Rng shuffle_rng = make_rng(config.seed, "train:shuffle");
  Rng dropout_rng = make_rng(config.seed, "train:dropout");
  Rng augment_rng = make_rng(config.seed, "train:augment");

  auto theta = result.model.parameters();
  Vector velocity(theta.size(), 0.0);
  Vector grad(theta.size(), 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<Example> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);
      if (augment) batch = augment(std::move(batch), augment_rng);

      const double lr = clr_learning_rate(iteration, config);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double loss = accumulate(result.model, batch, config.weight_decay,
                                     config.dropout_rate, &dropout_rng, &grad);
      if (!std::isfinite(loss)) throw DivergenceError(iteration, lr);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] - lr * grad[i];
        theta[i] += velocity[i];
        if (!std::isfinite(theta[i])) throw DivergenceError(iteration, lr);
      }
      epoch_loss += loss;
      ++batches;
      ++iteration;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  return result;
}

std::vector<ProbabilityVector> predict_batch(const ClassifierModel& model,
                                             std::span<const Vector> features,
                                             ExecPolicy policy) {
  std::vector<ProbabilityVector> out(features.size());
  parallel_for(features.size(), policy, [&](std::size_t i) { out[i] = forward(model, features[i]); });
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

std::vector<unsigned char> encode_model(const ClassifierModel& model) {
  std::vector<unsigned char> out = {'A', 'S', 'C', 'M'};
  put_u16(out, 1);
  out.push_back(static_cast<unsigned char>(model.architecture()));
  put_u32(out, static_cast<std::uint32_t>(model.input_dim()));
  put_u32(out, static_cast<std::uint32_t>(model.class_count()));
  put_u32(out, static_cast<std::uint32_t>(model.hidden_units()));
  for (double v : model.parameters()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
  }
  return out;
}

ClassifierModel decode_model(std::span<const unsigned char> bytes) {
  constexpr std::size_t kHeader = 19;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ASCM", 4) != 0) {
    throw FormatError("bad magic, expected \"ASCM\"", 0);
  }
  if (bytes.size() < kHeader) throw FormatError("truncated model header", bytes.size());
  if (get_le(bytes.data() + 4, 2) != 1) throw FormatError("unsupported model version", 4);
  const auto tag = bytes[6];
  if (tag > 1) throw FormatError("unknown architecture tag", 6);
  const auto P = get_le(bytes.data() + 7, 4);
  const auto C = get_le(bytes.data() + 11, 4);
  const auto H = get_le(bytes.data() + 15, 4);
  const auto arch = static_cast<Architecture>(tag);
  if (P == 0 || C == 0 || (arch == Architecture::mlp && H == 0) ||
      (arch == Architecture::linear && H != 0)) {
    throw FormatError("invalid model dimensions", 7);
  }
  ClassifierModel model(arch, P, C, H);
  auto theta = model.parameters();
  const std::size_t expected = kHeader + 8 * theta.size();
  if (bytes.size() != expected) {
    throw FormatError("model payload size mismatch: expected " + std::to_string(expected) +
                          " bytes",
                      std::min(bytes.size(), expected));
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const std::size_t offset = kHeader + 8 * i;
    theta[i] = std::bit_cast<double>(get_le(bytes.data() + offset, 8));
    if (!std::isfinite(theta[i])) throw FormatError("non-finite parameter", offset);
  }
  return model;
}

void write_model(const ClassifierModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ClassifierModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_model(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

}  // namespace asc
