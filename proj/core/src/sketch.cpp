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

#include "driftsketch/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace driftsketch {

void QuantConfig::validate() const {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw Error(ErrorCode::kConfigInvalid, "quant.bin_width must be > 0");
  }
  if (!std::isfinite(origin)) {
    throw Error(ErrorCode::kConfigInvalid, "quant.origin must be finite");
  }
  if (clamp_lo.has_value() != clamp_hi.has_value()) {
    throw Error(ErrorCode::kConfigInvalid,
                "quant.clamp_lo and quant.clamp_hi must be set together");
  }
  if (clamp_lo && !(*clamp_lo < *clamp_hi)) {
    throw Error(ErrorCode::kConfigInvalid, "quant.clamp_lo must be < quant.clamp_hi");
  }
}

TokenSet::TokenSet(std::vector<std::uint64_t> tokens) : tokens_(std::move(tokens)) {
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
}

void SketchConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kConfigInvalid, "sketch.k must be >= 1");
}

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kMax: return "max";
    case Aggregation::kMean: return "mean";
    case Aggregation::kUnion: return "union";
  }
  return "max";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "max") return Aggregation::kMax;
  if (name == "mean") return Aggregation::kMean;
  if (name == "union") return Aggregation::kUnion;
  throw Error(ErrorCode::kConfigInvalid,
              "gate.aggregation must be max, mean or union, got '" +
                  std::string(name) + "'");
}

void GateConfig::validate() const {
  if (!(j_alpha >= 0.0 && j_alpha <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "gate.j_alpha must be in [0,1]");
  }
}

std::string_view to_string(Verdict v) {
  return v == Verdict::kAnomalous ? "anomalous" : "acceptable";
}

std::uint64_t quantize_token(std::size_t index, std::int64_t bin) noexcept {
  const std::uint64_t dim_key = (static_cast<std::uint64_t>(index) + 1) * 0x9E3779B97F4A7C15ULL;
  return fmix64(dim_key ^ fmix64(static_cast<std::uint64_t>(bin)));
}

std::int64_t quantize_bin(double x, const QuantConfig& q) noexcept {
  if (q.clamp_lo) x = std::clamp(x, *q.clamp_lo, *q.clamp_hi);
  const double cell = std::floor((x - q.origin) / q.bin_width);
  constexpr double kLimit = 4.0e18;
  if (cell >= kLimit) return static_cast<std::int64_t>(kLimit);
  if (cell <= -kLimit) return -static_cast<std::int64_t>(kLimit);
  return static_cast<std::int64_t>(cell);
}

TokenSet tokenize(std::span<const double> v, const QuantConfig& q) {
  q.validate();
  std::vector<std::uint64_t> tokens;
  tokens.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::kNonFiniteValue, "component " + std::to_string(i));
    }
    tokens.push_back(quantize_token(i, quantize_bin(v[i], q)));
  }
  return TokenSet(std::move(tokens));
}

TokenSet tokenize(const FeatureVector& v, const QuantConfig& q) {
  return tokenize(std::span<const double>(v.values), q);
}

MinHasher::MinHasher(const SketchConfig& cfg) : seed_(cfg.hash_seed) {
  cfg.validate();
  keys_.reserve(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) {
    RandomStream s = seeded_rng(cfg.hash_seed, "minhash/" + std::to_string(j));
    const std::uint64_t a = s();
    const std::uint64_t b = s();
    keys_.push_back(Key{a, b | 1ULL});
  }
}

std::uint64_t MinHasher::hash(std::size_t j, std::uint64_t token) const noexcept {
  return fmix64((token ^ keys_[j].xor_key) * keys_[j].mul_key);
}

MinHashSignature MinHasher::sign(const TokenSet& tokens) const {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyTokenSet, "minhash");
  MinHashSignature sig;
  sig.hash_seed = seed_;
  sig.minima.assign(keys_.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t t : tokens.tokens()) {
    for (std::size_t j = 0; j < keys_.size(); ++j) {
      sig.minima[j] = std::min(sig.minima[j], hash(j, t));
    }
  }
  return sig;
}

MinHashSignature minhash(const TokenSet& tokens, const SketchConfig& cfg) {
  return MinHasher(cfg).sign(tokens);
}

namespace {

void require_compatible(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.k() != b.k() || a.hash_seed != b.hash_seed) {
    throw Error(ErrorCode::kIncompatibleSignatures,
                "k " + std::to_string(a.k()) + "/" + std::to_string(b.k()) +
                    ", seed " + std::to_string(a.hash_seed.value) + "/" +
                    std::to_string(b.hash_seed.value));
  }
}

}  // namespace

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  require_compatible(a, b);
  if (a.k() == 0) throw Error(ErrorCode::kIncompatibleSignatures, "empty signatures");
  std::size_t same = 0;
  for (std::size_t j = 0; j < a.k(); ++j) {
    if (a.minima[j] == b.minima[j]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(a.k());
}

double exact_jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.tokens().begin();
  auto ib = b.tokens().begin();
  while (ia != a.tokens().end() && ib != b.tokens().end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MinHashSignature merge_union(std::span<const LibraryEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::kEmptyLibrary, "merge_union");
  MinHashSignature out = entries.front().signature;
  for (const auto& e : entries.subspan(1)) {
    require_compatible(out, e.signature);
    for (std::size_t j = 0; j < out.k(); ++j) {
      out.minima[j] = std::min(out.minima[j], e.signature.minima[j]);
    }
  }
  return out;
}

SketchLibrary build_library(std::span<const FeatureVector> features,
                            const QuantConfig& q, const SketchConfig& s,
                            std::uint64_t extract_fingerprint) {
  q.validate();
  s.validate();
  if (features.empty()) throw Error(ErrorCode::kEmptyInput, "build_library");
  SketchLibrary lib;
  lib.sketch_config = s;
  lib.quant_config = q;
  lib.extract_fingerprint = extract_fingerprint;
  lib.dim = require_uniform_dim(features);

  std::unordered_set<std::string> seen;
  const MinHasher hasher(s);
  lib.entries.reserve(features.size());
  for (const auto& f : features) {
    if (!seen.insert(f.source_id).second) {
      throw Error(ErrorCode::kDuplicateSourceId, "'" + f.source_id + "'");
    }
    lib.entries.push_back(LibraryEntry{f.source_id, hasher.sign(tokenize(f, q))});
  }
  return lib;
}

Gate::Gate(const SketchLibrary& lib, const GateConfig& cfg,
           std::uint64_t extract_fingerprint)
    : lib_(lib), cfg_(cfg), hasher_(lib.sketch_config) {
  cfg_.validate();
  if (lib.entries.empty()) throw Error(ErrorCode::kEmptyLibrary, "gate");
  if (extract_fingerprint != lib.extract_fingerprint) {
    throw Error(ErrorCode::kIncompatibleConfig,
                "features were not produced by the library's extractor");
  }
  if (cfg_.aggregation == Aggregation::kUnion) union_sig_ = merge_union(lib.entries);
}

GateResult Gate::check(const FeatureVector& v) const {
  if (v.dim() != lib_.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "record '" + v.source_id + "' has dim " + std::to_string(v.dim()) +
                    ", library expects " + std::to_string(lib_.dim));
  }
  return check(hasher_.sign(tokenize(v, lib_.quant_config)));
}

GateResult Gate::check(const MinHashSignature& sig) const {
  double score = 0.0;
  switch (cfg_.aggregation) {
    case Aggregation::kMax:
      for (const auto& e : lib_.entries) {
        score = std::max(score, estimate_jaccard(e.signature, sig));
      }
      break;
    case Aggregation::kMean:
      for (const auto& e : lib_.entries) score += estimate_jaccard(e.signature, sig);
      score /= static_cast<double>(lib_.entries.size());
      break;
    case Aggregation::kUnion:
      score = estimate_jaccard(union_sig_, sig);
      break;
  }
  // Ties at the threshold pass: only a strictly lower score is anomalous.
  return GateResult{score < cfg_.j_alpha ? Verdict::kAnomalous : Verdict::kAcceptable,
                    score};
}

GateResult gate_check(const SketchLibrary& lib, const FeatureVector& v,
                      const GateConfig& g, std::uint64_t extract_fingerprint) {
  return Gate(lib, g, extract_fingerprint).check(v);
}

}  // namespace driftsketch
