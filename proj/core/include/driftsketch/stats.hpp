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

#ifndef DRIFTSKETCH_STATS_HPP_
#define DRIFTSKETCH_STATS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftsketch/core.hpp"

namespace driftsketch {

enum class CosineMode { kCentroid, kMeanPairwise };

std::string_view to_string(CosineMode m);
CosineMode parse_cosine_mode(std::string_view name);

struct StatsConfig {
  double ks_alpha = 0.05;
  CosineMode cosine_mode = CosineMode::kCentroid;
  std::size_t pairwise_cap = 10000;
  RandomSeed seed{0};  // pair sampling in mean_pairwise mode

  void validate() const;

  friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

struct PeriodStats {
  std::string period_id;
  std::size_t n_images = 0;
  double ks_d = 0.0;
  double ks_p = 1.0;
  double cosine_score = 1.0;
  std::size_t gate_flag_count = 0;
  bool drift_flag = false;

  friend bool operator==(const PeriodStats&, const PeriodStats&) = default;
};

struct DriftReport {
  std::string baseline_id;
  std::vector<PeriodStats> periods;

  // Throws kInvalidReport unless periods is non-empty and every statistic is
  // within range; drift_flag consistency is checked against ks_alpha.
  void validate(double ks_alpha) const;

  friend bool operator==(const DriftReport&, const DriftReport&) = default;
};

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|, evaluated
// exactly by merging the sorted samples and stepping over runs of ties.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Asymptotic Kolmogorov tail Q(lambda) with lambda = (sqrt(ne) + 0.12 +
// 0.11/sqrt(ne)) * D and ne = n*m/(n+m). Returns 1 when the alternating
// series has not converged within 100 terms (lambda near 0).
double ks_pvalue(double d, std::size_t n, std::size_t m);

// Q(lambda) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2), same truncation.
double kolmogorov_q(double lambda);

double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const FeatureVector& a, const FeatureVector& b);

double batch_cosine(std::span<const FeatureVector> a,
                    std::span<const FeatureVector> b, const StatsConfig& cfg);

std::vector<double> pool_scalars(std::span<const FeatureVector> batch);

std::vector<double> centroid(std::span<const FeatureVector> batch);

struct Period {
  std::string period_id;
  std::vector<FeatureVector> features;
};

// gate_flag_counts, when non-empty, must have one entry per period.
DriftReport drift_report(std::string baseline_id,
                         std::span<const FeatureVector> baseline,
                         std::span<const Period> periods, const StatsConfig& cfg,
                         std::span<const std::size_t> gate_flag_counts = {});

// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_STATS_HPP_
