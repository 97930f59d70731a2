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

#include "driftsketch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftsketch {

std::string_view to_string(CosineMode m) {
  return m == CosineMode::kMeanPairwise ? "mean_pairwise" : "centroid";
}

CosineMode parse_cosine_mode(std::string_view name) {
  if (name == "centroid") return CosineMode::kCentroid;
  if (name == "mean_pairwise") return CosineMode::kMeanPairwise;
  throw Error(ErrorCode::kConfigInvalid,
              "stats.cosine_mode must be centroid or mean_pairwise, got '" +
                  std::string(name) + "'");
}

void StatsConfig::validate() const {
  if (!(ks_alpha > 0.0 && ks_alpha < 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "stats.ks_alpha must be in (0,1)");
  }
  if (pairwise_cap < 1) {
    throw Error(ErrorCode::kConfigInvalid, "stats.pairwise_cap must be >= 1");
  }
}

void DriftReport::validate(double ks_alpha) const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidReport, msg); };
  if (periods.empty()) fail("drift report has no periods");
  for (const auto& p : periods) {
    if (!(p.ks_d >= 0.0 && p.ks_d <= 1.0)) fail("ks_D out of range in " + p.period_id);
    if (!(p.ks_p >= 0.0 && p.ks_p <= 1.0)) fail("ks_p out of range in " + p.period_id);
    if (!(p.cosine_score >= -1.0 && p.cosine_score <= 1.0)) {
      fail("cosine out of range in " + p.period_id);
    }
    if (p.drift_flag != (p.ks_p < ks_alpha)) fail("drift_flag inconsistent in " + p.period_id);
  }
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptySample, "ks_statistic");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  for (double x : sa) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteValue, "ks sample a");
  }
  for (double x : sb) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteValue, "ks sample b");
  }
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Past the end of one sample the difference only shrinks toward 0.
  return d;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(a2 * j * j);
    sum += term;
    if (std::abs(term) < 1e-10) return std::clamp(2.0 * sum, 0.0, 1.0);
    sign = -sign;
  }
  return 1.0;
}

double ks_pvalue(double d, std::size_t n, std::size_t m) {
  if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorCode::kInvalidD, std::to_string(d));
  if (n == 0 || m == 0) throw Error(ErrorCode::kEmptySample, "ks_pvalue");
  if (d == 0.0) return 1.0;
  const double ne = static_cast<double>(n) * static_cast<double>(m) /
                    static_cast<double>(n + m);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  return kolmogorov_q(lambda);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double cosine(const FeatureVector& a, const FeatureVector& b) {
  return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

std::vector<double> centroid(std::span<const FeatureVector> batch) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "centroid");
  const std::size_t d = require_uniform_dim(batch);
  std::vector<double> c(d, 0.0);
  for (const auto& v : batch) {
    for (std::size_t i = 0; i < d; ++i) c[i] += v.values[i];
  }
  for (double& x : c) x /= static_cast<double>(batch.size());
  return c;
}

double batch_cosine(std::span<const FeatureVector> a,
                    std::span<const FeatureVector> b, const StatsConfig& cfg) {
  cfg.validate();
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptyBatch, "batch_cosine");
  if (cfg.cosine_mode == CosineMode::kCentroid) {
    return cosine(centroid(a), centroid(b));
  }
  require_uniform_dim(a);
  require_uniform_dim(b);
  const std::size_t pairs = a.size() * b.size();
  double sum = 0.0;
  if (pairs <= cfg.pairwise_cap) {
    for (const auto& x : a) {
      for (const auto& y : b) sum += cosine(x, y);
    }
    return sum / static_cast<double>(pairs);
  }
  RandomStream rng = seeded_rng(cfg.seed, "stats/pairwise");
  for (std::size_t s = 0; s < cfg.pairwise_cap; ++s) {
    const auto i = static_cast<std::size_t>(rng.below(a.size()));
    const auto j = static_cast<std::size_t>(rng.below(b.size()));
    sum += cosine(a[i], b[j]);
  }
  return std::clamp(sum / static_cast<double>(cfg.pairwise_cap), -1.0, 1.0);
}

std::vector<double> pool_scalars(std::span<const FeatureVector> batch) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "pool_scalars");
  std::vector<double> out;
  for (const auto& v : batch) out.insert(out.end(), v.values.begin(), v.values.end());
  return out;
}

DriftReport drift_report(std::string baseline_id,
                         std::span<const FeatureVector> baseline,
                         std::span<const Period> periods, const StatsConfig& cfg,
                         std::span<const std::size_t> gate_flag_counts) {
  cfg.validate();
  if (baseline.empty()) throw Error(ErrorCode::kEmptyBatch, "baseline");
  if (periods.empty()) throw Error(ErrorCode::kEmptyInput, "no periods");
  if (!gate_flag_counts.empty() && gate_flag_counts.size() != periods.size()) {
    throw Error(ErrorCode::kLengthMismatch, "gate counts vs periods");
  }
  const std::size_t d = require_uniform_dim(baseline);
  const std::vector<double> base_pool = pool_scalars(baseline);

  DriftReport report;
  report.baseline_id = std::move(baseline_id);
  for (std::size_t k = 0; k < periods.size(); ++k) {
    const Period& p = periods[k];
    if (p.features.empty()) throw Error(ErrorCode::kEmptyBatch, "period '" + p.period_id + "'");
    if (require_uniform_dim(p.features) != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "period '" + p.period_id + "' dimension differs from baseline");
    }
    const std::vector<double> pool = pool_scalars(p.features);
    PeriodStats row;
    row.period_id = p.period_id;
    row.n_images = p.features.size();
    row.ks_d = ks_statistic(base_pool, pool);
    row.ks_p = ks_pvalue(row.ks_d, base_pool.size(), pool.size());
    row.cosine_score = batch_cosine(baseline, p.features, cfg);
    row.gate_flag_count = gate_flag_counts.empty() ? 0 : gate_flag_counts[k];
    row.drift_flag = row.ks_p < cfg.ks_alpha;
    report.periods.push_back(std::move(row));
  }
  return report;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return x[l] < x[r]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "spearman_rho");
  if (x.size() < 2) throw Error(ErrorCode::kEmptySample, "spearman_rho needs 2 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace driftsketch
