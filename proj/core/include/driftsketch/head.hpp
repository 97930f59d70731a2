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

#ifndef DRIFTSKETCH_HEAD_HPP_
#define DRIFTSKETCH_HEAD_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "driftsketch/core.hpp"

namespace driftsketch {

// A single sigmoid unit trained on top of frozen features: the extractor is
// the frozen part of the network, this is the tunable part.
struct HeadModel {
  std::vector<double> w;
  double b = 0.0;

  std::size_t dim() const noexcept { return w.size(); }

  friend bool operator==(const HeadModel&, const HeadModel&) = default;
};

// Adam moments over the flattened parameter vector (w..., b).
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  static AdamState zeros(std::size_t param_count);

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct TrainConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  // false reproduces the uncorrected update W -= lr * m / (sqrt(v) + eps).
  bool bias_correction = true;
  RandomSeed seed{0};

  void validate() const;
};

struct LabeledSample {
  FeatureVector x;
  int label = 0;  // 0 or 1
};

// Gradient of the mean BCE loss over (w..., b); size dim + 1.
struct HeadGradient {
  std::vector<double> w;
  double b = 0.0;
};

// sigma(w.x + b), evaluated in the overflow-free split form.
double sigmoid(double z) noexcept;
double predict(const HeadModel& model, std::span<const double> x);
double predict(const HeadModel& model, const FeatureVector& x);

// Mean binary cross-entropy. Probabilities are clamped into
// [1e-12, 1 - 1e-12] before taking logs.
double bce_loss(std::span<const double> probs, std::span<const int> labels);

double batch_loss(const HeadModel& model, std::span<const LabeledSample> batch);

HeadGradient bce_gradient(const HeadModel& model,
                          std::span<const LabeledSample> batch);

struct AdamResult {
  AdamState state;
  HeadModel params;
};

AdamResult adam_step(const AdamState& state, const HeadModel& params,
                     const HeadGradient& grad, const TrainConfig& cfg);

struct TrainResult {
  HeadModel model;
  std::vector<double> epoch_loss;  // sample-weighted mean batch loss per epoch
  AdamState adam;
};

// Mini-batch Adam over `epochs` passes. Each epoch reshuffles the data from
// the "head/shuffle" stream; the final partial batch is kept. Weights start
// at N(0, 1/d) from the "head/init" stream, bias at 0.
TrainResult train_head(std::span<const LabeledSample> data,
                       const TrainConfig& cfg);

double accuracy(const HeadModel& model, std::span<const LabeledSample> data,
                double threshold = 0.5);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_HEAD_HPP_
