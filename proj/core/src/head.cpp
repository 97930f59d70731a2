// Copyright 2026 The driftsketch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "driftsketch/head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace driftsketch {

namespace {

constexpr double kProbClamp = 1e-12;

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has dim " + std::to_string(got) +
                    ", expected " + std::to_string(want));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

AdamState AdamState::zeros(std::size_t param_count) {
  return AdamState{std::vector<double>(param_count, 0.0),
                   std::vector<double>(param_count, 0.0), 0};
}

void TrainConfig::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorCode::kConfigInvalid, msg); };
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must be in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must be in [0,1)");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double predict(const HeadModel& model, std::span<const double> x) {
  require_dim(x.size(), model.dim(), "input");
  return sigmoid(dot(model.w, x) + model.b);
}

double predict(const HeadModel& model, const FeatureVector& x) {
  return predict(model, std::span<const double>(x.values));
}

double bce_loss(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(probs.size()) + " probabilities vs " +
                    std::to_string(labels.size()) + " labels");
  }
  if (probs.empty()) throw Error(ErrorCode::kEmptyBatch, "bce_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    total += labels[i] != 0 ? std::log(p) : std::log1p(-p);
  }
  return -total / static_cast<double>(probs.size());
}

double batch_loss(const HeadModel& model, std::span<const LabeledSample> batch) {
  std::vector<double> probs;
  std::vector<int> labels;
  probs.reserve(batch.size());
  labels.reserve(batch.size());
  for (const auto& s : batch) {
    probs.push_back(predict(model, s.x));
    labels.push_back(s.label);
  }
  return bce_loss(probs, labels);
}

HeadGradient bce_gradient(const HeadModel& model,
                          std::span<const LabeledSample> batch) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "bce_gradient");
  HeadGradient g{std::vector<double>(model.dim(), 0.0), 0.0};
  for (const auto& s : batch) {
    // d/dz of BCE(sigma(z)) is (p - y); unclamped so an exact fit gives 0.
    const double r = predict(model, s.x) - static_cast<double>(s.label);
    for (std::size_t j = 0; j < g.w.size(); ++j) g.w[j] += r * s.x.values[j];
    g.b += r;
  }
  const auto n = static_cast<double>(batch.size());
  for (double& gj : g.w) gj /= n;
  g.b /= n;
  return g;
}

AdamResult adam_step(const AdamState& state, const HeadModel& params,
                     const HeadGradient& grad, const TrainConfig& cfg) {
  const std::size_t n = params.dim() + 1;
  require_dim(grad.w.size(), params.dim(), "gradient");
  require_dim(state.m.size(), n, "adam first moment");
  require_dim(state.v.size(), n, "adam second moment");

  AdamResult out{state, params};
  AdamState& s = out.state;
  s.t += 1;
  const double t = static_cast<double>(s.t);
  const double m_scale = cfg.bias_correction ? 1.0 / (1.0 - std::pow(cfg.beta1, t)) : 1.0;
  const double v_scale = cfg.bias_correction ? 1.0 / (1.0 - std::pow(cfg.beta2, t)) : 1.0;

  auto update = [&](std::size_t i, double g, double& param) {
    s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * g;
    s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = s.m[i] * m_scale;
    const double v_hat = s.v[i] * v_scale;
    param -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  };
  for (std::size_t j = 0; j < params.dim(); ++j) update(j, grad.w[j], out.params.w[j]);
  update(n - 1, grad.b, out.params.b);
  return out;
}

TrainResult train_head(std::span<const LabeledSample> data,
                       const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "train_head");
  const std::size_t d = data.front().x.dim();
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& s : data) {
    if (s.x.dim() != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "record '" + s.x.source_id + "' has dim " +
                      std::to_string(s.x.dim()) + ", expected " + std::to_string(d));
    }
    if (s.label != 0 && s.label != 1) {
      throw Error(ErrorCode::kMalformedFile,
                  "label of '" + s.x.source_id + "' must be 0 or 1");
    }
    (s.label == 1 ? has_pos : has_neg) = true;
  }
  if (data.size() < 2 || !has_pos || !has_neg) {
    throw Error(ErrorCode::kSingleClassData, "both labels must be present");
  }

  TrainResult result;
  result.model.w.resize(d);
  RandomStream init = seeded_rng(cfg.seed, "head/init");
  std::normal_distribution<double> unit(0.0, 1.0);
  const double scale = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  for (double& wj : result.model.w) wj = unit(init) * scale;
  result.adam = AdamState::zeros(d + 1);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  RandomStream shuffle_rng = seeded_rng(cfg.seed, "head/shuffle");
  std::vector<LabeledSample> batch;
  batch.reserve(cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);
      loss_sum += batch_loss(result.model, batch) * static_cast<double>(batch.size());
      const HeadGradient g = bce_gradient(result.model, batch);
      AdamResult step = adam_step(result.adam, result.model, g, cfg);
      result.adam = std::move(step.state);
      result.model = std::move(step.params);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));
  }
  return result;
}

double accuracy(const HeadModel& model, std::span<const LabeledSample> data,
                double threshold) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : data) {
    const int guess = predict(model, s.x) >= threshold ? 1 : 0;
    if (guess == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace driftsketch
