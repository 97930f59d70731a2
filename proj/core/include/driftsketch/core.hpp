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

#ifndef DRIFTSKETCH_CORE_HPP_
#define DRIFTSKETCH_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace driftsketch {

// Every failure in the library is reported as an Error carrying one of these
// codes. The CLI maps them onto exit codes; tests match on them.
enum class ErrorCode {
  kDimensionMismatch,
  kOutOfRangePixel,
  kNonFinitePixel,
  kInvalidShape,
  kConfigInvalid,
  kImageSmallerThanGrid,
  kMalformedFile,
  kNonFiniteValue,
  kLengthMismatch,
  kEmptyBatch,
  kEmptyData,
  kSingleClassData,
  kEmptyTokenSet,
  kIncompatibleSignatures,
  kEmptyInput,
  kDuplicateSourceId,
  kIncompatibleConfig,
  kEmptyLibrary,
  kEmptySample,
  kInvalidD,
  kZeroVector,
  kInvalidSigma,
  kInvalidFraction,
  kInvalidVariance,
  kInvalidLevel,
  kInvalidLevels,
  kUnsupportedFormat,
  kCorruptHeader,
  kTruncatedData,
  kBadMagic,
  kVersionUnsupported,
  kChecksumMismatch,
  kIoError,
  kTooFewIds,
  kDuplicateIds,
  kInvalidReport,
};

// Kebab-case name, e.g. "dimension-mismatch".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// ---------------------------------------------------------------------------
// Images

// Decoded raster with intensities normalized to [0,1]. Row-major,
// channel-interleaved: pixel (x, y, c) lives at (y * width + x) * channels + c.
struct ImageGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<double> pixels;

  std::size_t positions() const noexcept { return width * height; }
  std::size_t expected_size() const noexcept { return width * height * channels; }

  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * channels + c];
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

// Returns std::nullopt when every ImageGrid invariant holds, otherwise the
// first violation found (shape, then size, then per-pixel in index order).
std::optional<Error> validate_image(const ImageGrid& img);

// Throws the error validate_image would return.
void require_valid_image(const ImageGrid& img);

// ---------------------------------------------------------------------------
// Feature vectors

struct FeatureVector {
  std::vector<double> values;
  std::string source_id;

  std::size_t dim() const noexcept { return values.size(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Throws kNonFiniteValue if any component is NaN or infinite.
void require_finite(const FeatureVector& v);

// Throws kDimensionMismatch naming the first vector whose dimension differs
// from the first one. Returns the common dimension (0 for an empty list).
std::size_t require_uniform_dim(std::span<const FeatureVector> vs);

// ---------------------------------------------------------------------------
// Deterministic randomness

struct RandomSeed {
  std::uint64_t value = 0;

  friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

// 64-bit finalizer from MurmurHash3. A bijection on uint64 with full
// avalanche; the mixing primitive used for tokens and hash families.
constexpr std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

// FNV-1a, 64-bit. Also the integrity checksum of persisted binaries: each
// byte step is a bijection on the state, so any single-byte change in the
// input changes the digest.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::string_view text,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

// A labeled, seeded stream of uniform 64-bit values.
//
// The generator is std::mt19937_64 initialized through std::seed_seq from the
// four 32-bit halves of (seed, fnv1a64(label)). Both mt19937_64 and seed_seq
// are fully specified by the C++ standard, so the raw 64-bit sequence is
// reproducible across platforms. Distributions layered on top (normal,
// Poisson, shuffles) come from the standard library and are reproducible
// for a given toolchain.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(RandomSeed seed, std::string_view label);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform double in [0,1) with 53 bits of precision.
  double uniform01();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal(double mean = 0.0, double stddev = 1.0);

 private:
  std::mt19937_64 engine_;
};

RandomStream seeded_rng(RandomSeed seed, std::string_view stream_label);

// First value of seeded_rng(seed, label); used to hand independent seeds to
// per-item consumers (one noise seed per image, one hash key per function).
RandomSeed derive_seed(RandomSeed seed, std::string_view label);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_CORE_HPP_
