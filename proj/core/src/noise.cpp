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

#include "driftsketch/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftsketch {

std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kSaltPepper: return "salt-pepper";
    case NoiseKind::kSpeckle: return "speckle";
    case NoiseKind::kPoisson: return "poisson";
  }
  return "gaussian";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "salt-pepper" || name == "salt_pepper") return NoiseKind::kSaltPepper;
  if (name == "speckle") return NoiseKind::kSpeckle;
  if (name == "poisson") return NoiseKind::kPoisson;
  throw Error(ErrorCode::kConfigInvalid, "unknown noise kind '" + std::string(name) + "'");
}

void validate_noise_level(NoiseKind kind, double level) {
  const std::string shown = std::to_string(level);
  switch (kind) {
    case NoiseKind::kGaussian:
      if (!(level >= 0.0) || !std::isfinite(level)) throw Error(ErrorCode::kInvalidSigma, shown);
      break;
    case NoiseKind::kSaltPepper:
      if (!(level >= 0.0 && level <= 1.0)) throw Error(ErrorCode::kInvalidFraction, shown);
      break;
    case NoiseKind::kSpeckle:
      if (!(level >= 0.0) || !std::isfinite(level)) throw Error(ErrorCode::kInvalidVariance, shown);
      break;
    case NoiseKind::kPoisson:
      if (!(level > 0.0 && level <= 1.0)) throw Error(ErrorCode::kInvalidLevel, shown);
      break;
  }
}

ImageGrid gaussian_noise(const ImageGrid& img, double sigma, RandomSeed seed) {
  require_valid_image(img);
  validate_noise_level(NoiseKind::kGaussian, sigma);
  ImageGrid out = img;
  if (sigma == 0.0) return out;
  RandomStream rng = seeded_rng(seed, "noise/gaussian");
  std::normal_distribution<double> n(0.0, sigma);
  for (double& p : out.pixels) p = std::clamp(p + n(rng), 0.0, 1.0);
  return out;
}

std::size_t salt_pepper_count(double fraction, std::size_t positions) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(positions) + 0.5));
}

ImageGrid salt_pepper(const ImageGrid& img, double fraction, RandomSeed seed) {
  require_valid_image(img);
  validate_noise_level(NoiseKind::kSaltPepper, fraction);
  ImageGrid out = img;
  const std::size_t n = img.positions();
  const std::size_t count = std::min(n, salt_pepper_count(fraction, n));
  if (count == 0) return out;

  // Partial Fisher-Yates: the first `count` slots are a uniform sample of
  // distinct positions. A smaller fraction under the same seed corrupts a
  // prefix of the same positions.
  RandomStream rng = seeded_rng(seed, "noise/salt-pepper");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
    const double value = (rng() >> 63) != 0 ? 1.0 : 0.0;
    for (std::size_t c = 0; c < img.channels; ++c) {
      out.pixels[idx[i] * img.channels + c] = value;
    }
  }
  return out;
}

ImageGrid speckle(const ImageGrid& img, double variance, RandomSeed seed) {
  require_valid_image(img);
  validate_noise_level(NoiseKind::kSpeckle, variance);
  ImageGrid out = img;
  if (variance == 0.0) return out;
  RandomStream rng = seeded_rng(seed, "noise/speckle");
  std::normal_distribution<double> n(0.0, std::sqrt(variance));
  for (double& p : out.pixels) p = std::clamp(p * (1.0 + n(rng)), 0.0, 1.0);
  return out;
}

ImageGrid poisson_noise(const ImageGrid& img, double level, RandomSeed seed) {
  require_valid_image(img);
  validate_noise_level(NoiseKind::kPoisson, level);
  ImageGrid out = img;
  const double photons = 255.0 / level;
  RandomStream rng = seeded_rng(seed, "noise/poisson");
  for (double& p : out.pixels) {
    const double mean = p * photons;
    if (mean <= 0.0) {
      p = 0.0;
      continue;
    }
    std::poisson_distribution<long long> dist(mean);
    p = std::clamp(static_cast<double>(dist(rng)) / photons, 0.0, 1.0);
  }
  return out;
}

ImageGrid apply_noise(const ImageGrid& img, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::kGaussian: return gaussian_noise(img, spec.level, spec.seed);
    case NoiseKind::kSaltPepper: return salt_pepper(img, spec.level, spec.seed);
    case NoiseKind::kSpeckle: return speckle(img, spec.level, spec.seed);
    case NoiseKind::kPoisson: return poisson_noise(img, spec.level, spec.seed);
  }
  return img;
}

std::vector<double> SensitivityReport::levels() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.level);
  return out;
}

void SensitivityReport::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidReport, msg); };
  if (rows.empty()) fail("sensitivity report has no rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && !(r.level > rows[i - 1].level)) fail("levels must be strictly increasing");
    if (!(r.cosine >= -1.0 && r.cosine <= 1.0)) fail("cosine out of range");
    if (!(r.ks_d >= 0.0 && r.ks_d <= 1.0)) fail("ks_D out of range");
    if (!(r.ks_p >= 0.0 && r.ks_p <= 1.0)) fail("ks_p out of range");
    if (!(r.anomaly_rate >= 0.0 && r.anomaly_rate <= 1.0)) fail("anomaly rate out of range");
  }
}

SensitivityReport sensitivity_sweep(std::span<const ImageGrid> baseline_images,
                                    std::span<const ImageGrid> test_images,
                                    NoiseKind kind, std::span<const double> levels,
                                    const PipelineConfig& pipeline, RandomSeed seed) {
  pipeline.validate();
  if (baseline_images.empty()) throw Error(ErrorCode::kEmptyInput, "no baseline images");
  if (test_images.empty()) throw Error(ErrorCode::kEmptyInput, "no test images");
  if (levels.empty()) throw Error(ErrorCode::kInvalidLevels, "no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw Error(ErrorCode::kInvalidLevels, "levels must be strictly increasing");
    }
    // Level 0 is the clean reference row for every kind, poisson included.
    if (!(kind == NoiseKind::kPoisson && levels[i] == 0.0)) {
      validate_noise_level(kind, levels[i]);
    }
  }

  const std::vector<FeatureVector> baseline = extract_batch(baseline_images, pipeline.extract);
  const std::vector<double> base_pool = pool_scalars(baseline);
  const SketchLibrary lib = build_library(baseline, pipeline.quant, pipeline.sketch,
                                          pipeline.extract.fingerprint());
  const Gate gate(lib, pipeline.gate, pipeline.extract.fingerprint());

  std::vector<RandomSeed> image_seeds;
  image_seeds.reserve(test_images.size());
  for (std::size_t i = 0; i < test_images.size(); ++i) {
    image_seeds.push_back(derive_seed(seed, "sweep/image/" + std::to_string(i)));
  }

  SensitivityReport report;
  report.kind = kind;
  for (double level : levels) {
    std::vector<FeatureVector> feats;
    feats.reserve(test_images.size());
    for (std::size_t i = 0; i < test_images.size(); ++i) {
      const ImageGrid noisy = level == 0.0 ? test_images[i]
                                           : apply_noise(test_images[i], {kind, level, image_seeds[i]});
      FeatureVector f = extract_builtin(noisy, pipeline.extract);
      f.source_id = std::to_string(i);
      feats.push_back(std::move(f));
    }
    std::size_t anomalous = 0;
    for (const auto& f : feats) {
      if (gate.check(f).verdict == Verdict::kAnomalous) ++anomalous;
    }
    const std::vector<double> pool = pool_scalars(feats);
    SensitivityRow row;
    row.level = level;
    row.cosine = batch_cosine(baseline, feats, pipeline.stats);
    row.ks_d = ks_statistic(base_pool, pool);
    row.ks_p = ks_pvalue(row.ks_d, base_pool.size(), pool.size());
    row.anomaly_rate = static_cast<double>(anomalous) / static_cast<double>(feats.size());
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace driftsketch
