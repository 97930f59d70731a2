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

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace driftsketch::testing {

ImageGrid StructuredImageGenerator::make(RandomSeed seed) const {
  RandomStream rng = seeded_rng(seed, "synth/structured");
  const double cx = 0.5 * static_cast<double>(width) + rng.normal(0.0, position_jitter);
  const double cy = 0.5 * static_cast<double>(height) + rng.normal(0.0, position_jitter);
  const double radius = 0.22 * static_cast<double>(std::min(width, height)) *
                        (1.0 + 0.05 * rng.normal());
  const double amp = amplitude * (1.0 + 0.03 * rng.normal());

  ImageGrid img{width, height, 1, std::vector<double>(width * height)};
  std::normal_distribution<double> texture(0.0, texture_sigma);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double blob = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
      img.pixels[y * width + x] = std::clamp(background + blob + texture(rng), 0.0, 1.0);
    }
  }
  return img;
}

std::vector<ImageGrid> StructuredImageGenerator::batch(RandomSeed seed, std::size_t count) const {
  std::vector<ImageGrid> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(make(derive_seed(seed, "synth/" + std::to_string(i))));
  }
  return out;
}

ImageGrid uniform_noise_image(std::size_t width, std::size_t height, RandomSeed seed) {
  RandomStream rng = seeded_rng(seed, "synth/uniform");
  ImageGrid img{width, height, 1, std::vector<double>(width * height)};
  for (double& p : img.pixels) p = rng.uniform01();
  return img;
}

ImageGrid constant_image(std::size_t width, std::size_t height, double value,
                         std::size_t channels) {
  return ImageGrid{width, height, channels,
                   std::vector<double>(width * height * channels, value)};
}

std::vector<std::string> numbered_ids(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04zu", i);
    out.push_back(prefix + buf);
  }
  return out;
}

}  // namespace driftsketch::testing
