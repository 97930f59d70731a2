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

#ifndef DRIFTSKETCH_NOISE_HPP_
#define DRIFTSKETCH_NOISE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driftsketch/core.hpp"
#include "driftsketch/pipeline.hpp"

namespace driftsketch {

enum class NoiseKind { kGaussian, kSaltPepper, kSpeckle, kPoisson };

// "gaussian", "salt-pepper", "speckle", "poisson". Parsing also accepts
// "salt_pepper".
std::string_view to_string(NoiseKind k);
NoiseKind parse_noise_kind(std::string_view name);

// level means: gaussian sigma; salt-pepper fraction of pixel positions;
// speckle variance; poisson inverse strength in (0,1], photon scale 255/level.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  double level = 0.0;
  RandomSeed seed{0};
};

// All noise functions clamp results into [0,1] and are exact identities at
// their zero level (poisson has no zero level).
ImageGrid gaussian_noise(const ImageGrid& img, double sigma, RandomSeed seed);
ImageGrid salt_pepper(const ImageGrid& img, double fraction, RandomSeed seed);
ImageGrid speckle(const ImageGrid& img, double variance, RandomSeed seed);
ImageGrid poisson_noise(const ImageGrid& img, double level, RandomSeed seed);

// Number of positions salt_pepper corrupts: round-half-up(fraction * n).
std::size_t salt_pepper_count(double fraction, std::size_t positions);

ImageGrid apply_noise(const ImageGrid& img, const NoiseSpec& spec);

// Throws the kind's invalid-* error when level is outside its domain.
void validate_noise_level(NoiseKind kind, double level);

struct SensitivityRow {
  double level = 0.0;
  double cosine = 1.0;
  double ks_d = 0.0;
  double ks_p = 1.0;
  double anomaly_rate = 0.0;

  friend bool operator==(const SensitivityRow&, const SensitivityRow&) = default;
};

struct SensitivityReport {
  NoiseKind kind = NoiseKind::kGaussian;
  std::vector<SensitivityRow> rows;

  std::vector<double> levels() const;
  // Throws kInvalidReport on non-increasing levels or out-of-range statistics.
  void validate() const;

  friend bool operator==(const SensitivityReport&, const SensitivityReport&) = default;
};

// Corrupts every test image at each level (noise seed derived from
// (seed, level index, image index)), re-extracts, and compares against the
// clean baseline: centroid/pairwise cosine, pooled KS, and gate anomaly rate
// against a library built from the baseline features.
SensitivityReport sensitivity_sweep(std::span<const ImageGrid> baseline_images,
                                    std::span<const ImageGrid> test_images,
                                    NoiseKind kind, std::span<const double> levels,
                                    const PipelineConfig& pipeline, RandomSeed seed);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_NOISE_HPP_
