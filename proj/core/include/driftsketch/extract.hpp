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

#ifndef DRIFTSKETCH_EXTRACT_HPP_
#define DRIFTSKETCH_EXTRACT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "driftsketch/core.hpp"

namespace driftsketch {

// Parameters of the built-in feature extractor.
//
// Output layout (before projection), for an image with C channels:
//   for each grid cell in row-major order, for each channel c:
//     [mean, population stddev] of the cell's intensities in channel c
//   then for each channel c:
//     hist_bins normalized histogram counts over [0,1]
// giving grid*grid*2*C + hist_bins*C components.
struct ExtractConfig {
  std::size_t grid = 4;
  std::size_t hist_bins = 16;
  std::size_t projection_dim = 0;  // 0 disables the random projection
  RandomSeed projection_seed{0};
  bool l2_normalize = true;

  void validate() const;
  // Identity of the extractor; sketch libraries record it so a gate never
  // compares features produced by two different extractors.
  std::uint64_t fingerprint() const;

  friend bool operator==(const ExtractConfig&, const ExtractConfig&) = default;
};

std::size_t raw_feature_dim(const ExtractConfig& cfg, std::size_t channels);

FeatureVector extract_builtin(const ImageGrid& img, const ExtractConfig& cfg);

// Extracts every image in order. source_ids are copied from `ids`, which must
// have the same length as `images` (or be empty, giving ids "0", "1", ...).
std::vector<FeatureVector> extract_batch(std::span<const ImageGrid> images,
                                         const ExtractConfig& cfg,
                                         std::span<const std::string> ids = {});

// Reads an embedding file (see store.hpp for the format).
std::vector<FeatureVector> load_embeddings(const std::filesystem::path& path);

// Fingerprint used for libraries built from externally computed embeddings.
std::uint64_t embedding_fingerprint(std::size_t dim);

FeatureVector l2_normalize(FeatureVector v);
void l2_normalize_in_place(std::span<double> values);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_EXTRACT_HPP_
