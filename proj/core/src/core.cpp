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

#include "driftsketch/core.hpp"

#include <array>
#include <cmath>

namespace driftsketch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kOutOfRangePixel: return "out-of-range-pixel";
    case ErrorCode::kNonFinitePixel: return "non-finite-pixel";
    case ErrorCode::kInvalidShape: return "invalid-shape";
    case ErrorCode::kConfigInvalid: return "config-invalid";
    case ErrorCode::kImageSmallerThanGrid: return "image-smaller-than-grid";
    case ErrorCode::kMalformedFile: return "malformed-file";
    case ErrorCode::kNonFiniteValue: return "non-finite-value";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kEmptyBatch: return "empty-batch";
    case ErrorCode::kEmptyData: return "empty-data";
    case ErrorCode::kSingleClassData: return "single-class-data";
    case ErrorCode::kEmptyTokenSet: return "empty-token-set";
    case ErrorCode::kIncompatibleSignatures: return "incompatible-signatures";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kDuplicateSourceId: return "duplicate-source-id";
    case ErrorCode::kIncompatibleConfig: return "incompatible-config";
    case ErrorCode::kEmptyLibrary: return "empty-library";
    case ErrorCode::kEmptySample: return "empty-sample";
    case ErrorCode::kInvalidD: return "invalid-D";
    case ErrorCode::kZeroVector: return "zero-vector";
    case ErrorCode::kInvalidSigma: return "invalid-sigma";
    case ErrorCode::kInvalidFraction: return "invalid-fraction";
    case ErrorCode::kInvalidVariance: return "invalid-variance";
    case ErrorCode::kInvalidLevel: return "invalid-level";
    case ErrorCode::kInvalidLevels: return "invalid-levels";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kCorruptHeader: return "corrupt-header";
    case ErrorCode::kTruncatedData: return "truncated-data";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kVersionUnsupported: return "version-unsupported";
    case ErrorCode::kChecksumMismatch: return "checksum-mismatch";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kTooFewIds: return "too-few-ids";
    case ErrorCode::kDuplicateIds: return "duplicate-ids";
    case ErrorCode::kInvalidReport: return "invalid-report";
  }
  return "unknown-error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

std::optional<Error> validate_image(const ImageGrid& img) {
  if (img.width == 0 || img.height == 0) {
    return Error(ErrorCode::kInvalidShape, "width and height must be >= 1");
  }
  if (img.channels != 1 && img.channels != 3) {
    return Error(ErrorCode::kInvalidShape,
                 "channels must be 1 or 3, got " + std::to_string(img.channels));
  }
  if (img.pixels.size() != img.expected_size()) {
    return Error(ErrorCode::kDimensionMismatch,
                 "expected " + std::to_string(img.expected_size()) +
                     " pixels, got " + std::to_string(img.pixels.size()));
  }
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double p = img.pixels[i];
    if (!std::isfinite(p)) {
      return Error(ErrorCode::kNonFinitePixel, "index " + std::to_string(i));
    }
    if (p < 0.0 || p > 1.0) {
      return Error(ErrorCode::kOutOfRangePixel, "index " + std::to_string(i));
    }
  }
  return std::nullopt;
}

void require_valid_image(const ImageGrid& img) {
  if (auto err = validate_image(img)) throw *err;
}

void require_finite(const FeatureVector& v) {
  for (double x : v.values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFiniteValue, "record '" + v.source_id + "'");
    }
  }
}

std::size_t require_uniform_dim(std::span<const FeatureVector> vs) {
  if (vs.empty()) return 0;
  const std::size_t d = vs.front().dim();
  for (const auto& v : vs) {
    if (v.dim() != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "record '" + v.source_id + "' has dim " +
                      std::to_string(v.dim()) + ", expected " +
                      std::to_string(d));
    }
  }
  return d;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) noexcept {
  return fnv1a64(std::span<const std::uint8_t>(
                     reinterpret_cast<const std::uint8_t*>(text.data()),
                     text.size()),
                 basis);
}

namespace {

__extension__ using uint128 = unsigned __int128;

std::mt19937_64 make_engine(RandomSeed seed, std::string_view label) {
  const std::uint64_t tag = fnv1a64(label);
  std::array<std::uint32_t, 4> words = {
      static_cast<std::uint32_t>(seed.value),
      static_cast<std::uint32_t>(seed.value >> 32),
      static_cast<std::uint32_t>(tag),
      static_cast<std::uint32_t>(tag >> 32),
  };
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(RandomSeed seed, std::string_view label)
    : engine_(make_engine(seed, label)) {}

double RandomStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  // Lemire's nearly-divisionless bounded integer.
  std::uint64_t x = engine_();
  uint128 m = static_cast<uint128>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = engine_();
      m = static_cast<uint128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RandomStream::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(*this);
}

RandomStream seeded_rng(RandomSeed seed, std::string_view stream_label) {
  return RandomStream(seed, stream_label);
}

RandomSeed derive_seed(RandomSeed seed, std::string_view label) {
  RandomStream s(seed, label);
  return RandomSeed{s()};
}

}  // namespace driftsketch
