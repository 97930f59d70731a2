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

#include "driftsketch/extract.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftsketch/store.hpp"

namespace driftsketch {

void ExtractConfig::validate() const {
  if (grid < 1) throw Error(ErrorCode::kConfigInvalid, "extract.grid must be >= 1");
  if (hist_bins < 2) {
    throw Error(ErrorCode::kConfigInvalid, "extract.hist_bins must be >= 2");
  }
}

std::uint64_t ExtractConfig::fingerprint() const {
  const std::string canon = "builtin-extract/v1 grid=" + std::to_string(grid) +
                            " bins=" + std::to_string(hist_bins) +
                            " proj=" + std::to_string(projection_dim) +
                            " pseed=" + std::to_string(projection_seed.value) +
                            " l2=" + (l2_normalize ? "1" : "0");
  return fnv1a64(canon);
}

std::uint64_t embedding_fingerprint(std::size_t dim) {
  return fnv1a64("external-embedding/v1 dim=" + std::to_string(dim));
}

std::size_t raw_feature_dim(const ExtractConfig& cfg, std::size_t channels) {
  return cfg.grid * cfg.grid * 2 * channels + cfg.hist_bins * channels;
}

void l2_normalize_in_place(std::span<double> values) {
  double sum_sq = 0.0;
  for (double x : values) sum_sq += x * x;
  if (sum_sq == 0.0) return;
  const double norm = std::sqrt(sum_sq);
  for (double& x : values) x /= norm;
}

FeatureVector l2_normalize(FeatureVector v) {
  l2_normalize_in_place(v.values);
  return v;
}

namespace {

void append_patch_stats(const ImageGrid& img, std::size_t grid,
                        std::vector<double>& out) {
  const std::size_t c_count = img.channels;
  for (std::size_t gy = 0; gy < grid; ++gy) {
    const std::size_t y0 = gy * img.height / grid;
    const std::size_t y1 = (gy + 1) * img.height / grid;
    for (std::size_t gx = 0; gx < grid; ++gx) {
      const std::size_t x0 = gx * img.width / grid;
      const std::size_t x1 = (gx + 1) * img.width / grid;
      const auto n = static_cast<double>((y1 - y0) * (x1 - x0));
      for (std::size_t c = 0; c < c_count; ++c) {
        double sum = 0.0;
        for (std::size_t y = y0; y < y1; ++y) {
          for (std::size_t x = x0; x < x1; ++x) sum += img.at(x, y, c);
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t y = y0; y < y1; ++y) {
          for (std::size_t x = x0; x < x1; ++x) {
            const double dev = img.at(x, y, c) - mean;
            ss += dev * dev;
          }
        }
        out.push_back(mean);
        out.push_back(std::sqrt(ss / n));
      }
    }
  }
}

void append_histograms(const ImageGrid& img, std::size_t bins,
                       std::vector<double>& out) {
  const std::size_t c_count = img.channels;
  std::vector<std::size_t> counts(bins * c_count, 0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const std::size_t c = i % c_count;
    const double p = img.pixels[i];
    auto bin = static_cast<std::size_t>(p * static_cast<double>(bins));
    bin = std::min(bin, bins - 1);
    ++counts[c * bins + bin];
  }
  const auto n = static_cast<double>(img.positions());
  for (std::size_t k : counts) out.push_back(static_cast<double>(k) / n);
}

std::vector<double> project(std::span<const double> raw, std::size_t out_dim,
                            RandomSeed seed) {
  // Row-major out_dim x raw.size() matrix of unit normals.
  RandomStream rng = seeded_rng(seed, "extract/projection");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(out_dim, 0.0);
  for (std::size_t r = 0; r < out_dim; ++r) {
    double acc = 0.0;
    for (double x : raw) acc += unit(rng) * x;
    out[r] = acc;
  }
  return out;
}

}  // namespace

FeatureVector extract_builtin(const ImageGrid& img, const ExtractConfig& cfg) {
  cfg.validate();
  require_valid_image(img);
  if (img.width < cfg.grid || img.height < cfg.grid) {
    throw Error(ErrorCode::kImageSmallerThanGrid,
                std::to_string(img.width) + "x" + std::to_string(img.height) +
                    " image with grid " + std::to_string(cfg.grid));
  }
  const std::size_t raw_dim = raw_feature_dim(cfg, img.channels);
  if (cfg.projection_dim > raw_dim) {
    throw Error(ErrorCode::kConfigInvalid,
                "extract.projection_dim " + std::to_string(cfg.projection_dim) +
                    " exceeds raw dimension " + std::to_string(raw_dim));
  }

  FeatureVector f;
  f.values.reserve(raw_dim);
  append_patch_stats(img, cfg.grid, f.values);
  append_histograms(img, cfg.hist_bins, f.values);

  if (cfg.projection_dim > 0) {
    f.values = project(f.values, cfg.projection_dim, cfg.projection_seed);
  }
  if (cfg.l2_normalize) l2_normalize_in_place(f.values);
  return f;
}

std::vector<FeatureVector> extract_batch(std::span<const ImageGrid> images,
                                         const ExtractConfig& cfg,
                                         std::span<const std::string> ids) {
  if (!ids.empty() && ids.size() != images.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(images.size()) + " images but " +
                    std::to_string(ids.size()) + " ids");
  }
  std::vector<FeatureVector> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    FeatureVector f = extract_builtin(images[i], cfg);
    f.source_id = ids.empty() ? std::to_string(i) : ids[i];
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FeatureVector> load_embeddings(const std::filesystem::path& path) {
  return read_embedding_file(path);
}

}  // namespace driftsketch
