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

#ifndef DRIFTSKETCH_SKETCH_HPP_
#define DRIFTSKETCH_SKETCH_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftsketch/core.hpp"

namespace driftsketch {

// Per-dimension quantization that turns a real vector into a set of
// (dimension, bin) tokens.
struct QuantConfig {
  double bin_width = 0.05;
  double origin = 0.0;
  std::optional<double> clamp_lo;
  std::optional<double> clamp_hi;

  void validate() const;

  friend bool operator==(const QuantConfig&, const QuantConfig&) = default;
};

// Sorted, duplicate-free.
class TokenSet {
 public:
  TokenSet() = default;
  explicit TokenSet(std::vector<std::uint64_t> tokens);

  const std::vector<std::uint64_t>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  std::vector<std::uint64_t> tokens_;
};

struct SketchConfig {
  std::size_t k = 128;
  RandomSeed hash_seed{0};

  void validate() const;

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

struct MinHashSignature {
  std::vector<std::uint64_t> minima;
  RandomSeed hash_seed{0};

  std::size_t k() const noexcept { return minima.size(); }

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

enum class Aggregation { kMax, kMean, kUnion };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view name);

struct GateConfig {
  double j_alpha = 0.5;
  Aggregation aggregation = Aggregation::kMax;

  void validate() const;

  friend bool operator==(const GateConfig&, const GateConfig&) = default;
};

struct LibraryEntry {
  std::string source_id;
  MinHashSignature signature;

  friend bool operator==(const LibraryEntry&, const LibraryEntry&) = default;
};

// The baseline: one signature per trusted feature vector, plus everything
// needed to sketch new vectors the same way.
struct SketchLibrary {
  std::vector<LibraryEntry> entries;
  SketchConfig sketch_config;
  QuantConfig quant_config;
  std::uint64_t extract_fingerprint = 0;
  std::size_t dim = 0;

  friend bool operator==(const SketchLibrary&, const SketchLibrary&) = default;
};

// token = fmix64((i + 1) * 0x9E3779B97F4A7C15 ^ fmix64(bin)), where
// bin = floor((x - origin) / bin_width) as a signed 64-bit integer (saturated).
std::uint64_t quantize_token(std::size_t index, std::int64_t bin) noexcept;
std::int64_t quantize_bin(double x, const QuantConfig& q) noexcept;

TokenSet tokenize(std::span<const double> v, const QuantConfig& q);
TokenSet tokenize(const FeatureVector& v, const QuantConfig& q);

// The k seeded hash functions h_j(t) = fmix64((t ^ a_j) * (b_j | 1)), with
// (a_j, b_j) the first two values of the stream labeled "minhash/<j>".
// Each h_j is a bijection on uint64, so distinct tokens never collide.
class MinHasher {
 public:
  explicit MinHasher(const SketchConfig& cfg);

  MinHashSignature sign(const TokenSet& tokens) const;
  std::uint64_t hash(std::size_t j, std::uint64_t token) const noexcept;
  std::size_t k() const noexcept { return keys_.size(); }

 private:
  struct Key {
    std::uint64_t xor_key;
    std::uint64_t mul_key;
  };
  std::vector<Key> keys_;
  RandomSeed seed_;
};

MinHashSignature minhash(const TokenSet& tokens, const SketchConfig& cfg);

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);
double exact_jaccard(const TokenSet& a, const TokenSet& b);

// Elementwise minimum: the signature of the union of the underlying sets.
MinHashSignature merge_union(std::span<const LibraryEntry> entries);

SketchLibrary build_library(std::span<const FeatureVector> features,
                            const QuantConfig& q, const SketchConfig& s,
                            std::uint64_t extract_fingerprint);

enum class Verdict { kAcceptable, kAnomalous };

std::string_view to_string(Verdict v);

struct GateResult {
  Verdict verdict = Verdict::kAcceptable;
  double score = 0.0;
};

// Jaccard threshold gate bound to one library. Construction checks that incoming
// features come from the extractor the library was built with.
class Gate {
 public:
  Gate(const SketchLibrary& lib, const GateConfig& cfg,
       std::uint64_t extract_fingerprint);

  GateResult check(const FeatureVector& v) const;
  GateResult check(const MinHashSignature& sig) const;

 private:
  const SketchLibrary& lib_;
  GateConfig cfg_;
  MinHasher hasher_;
  MinHashSignature union_sig_;
};

GateResult gate_check(const SketchLibrary& lib, const FeatureVector& v,
                      const GateConfig& g, std::uint64_t extract_fingerprint);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_SKETCH_HPP_
