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

#include <bit>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "driftsketch/store.hpp"

namespace driftsketch {

namespace {

constexpr std::uint16_t kLibraryVersion = 1;
constexpr std::uint16_t kModelVersion = 1;
constexpr std::size_t kPreamble = 4 + 2 + 8;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorCode::kTruncatedData, "payload ends early");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> seal(std::string_view magic, std::uint16_t version,
                               const std::vector<std::uint8_t>& payload) {
  ByteWriter w;
  for (char c : magic) w.u8(static_cast<std::uint8_t>(c));
  w.u16(version);
  w.u64(payload.size());
  auto out = w.take();
  out.insert(out.end(), payload.begin(), payload.end());
  ByteWriter tail;
  tail.u64(fnv1a64(payload));
  const auto t = tail.take();
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

std::span<const std::uint8_t> unseal(std::span<const std::uint8_t> bytes,
                                     std::string_view magic, std::uint16_t version) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "expected '" + std::string(magic) + "'");
  }
  ByteReader r(bytes.subspan(4));
  if (r.remaining() < 2 + 8) throw Error(ErrorCode::kTruncatedData, "short preamble");
  const std::uint16_t got = r.u16();
  if (got != version) {
    throw Error(ErrorCode::kVersionUnsupported, "version " + std::to_string(got));
  }
  const std::uint64_t len = r.u64();
  if (bytes.size() - kPreamble < 8 || len != bytes.size() - kPreamble - 8) {
    throw Error(ErrorCode::kTruncatedData, "payload length does not match file size");
  }
  const auto payload = bytes.subspan(kPreamble, len);
  ByteReader tail(bytes.subspan(kPreamble + len));
  if (tail.u64() != fnv1a64(payload)) {
    throw Error(ErrorCode::kChecksumMismatch, std::string(magic) + " payload");
  }
  return payload;
}

}  // namespace

std::vector<std::uint8_t> save_library(const SketchLibrary& lib) {
  ByteWriter w;
  w.u64(lib.sketch_config.k);
  w.u64(lib.sketch_config.hash_seed.value);
  w.f64(lib.quant_config.bin_width);
  w.f64(lib.quant_config.origin);
  w.u8(lib.quant_config.clamp_lo ? 1 : 0);
  w.f64(lib.quant_config.clamp_lo.value_or(0.0));
  w.f64(lib.quant_config.clamp_hi.value_or(0.0));
  w.u64(lib.extract_fingerprint);
  w.u64(lib.dim);
  w.u64(lib.entries.size());
  for (const auto& e : lib.entries) {
    w.str(e.source_id);
    w.u64(e.signature.hash_seed.value);
    w.u64(e.signature.minima.size());
    for (std::uint64_t m : e.signature.minima) w.u64(m);
  }
  return seal("DSKL", kLibraryVersion, w.take());
}

SketchLibrary load_library(std::span<const std::uint8_t> bytes) {
  ByteReader r(unseal(bytes, "DSKL", kLibraryVersion));
  SketchLibrary lib;
  lib.sketch_config.k = r.u64();
  lib.sketch_config.hash_seed = RandomSeed{r.u64()};
  lib.quant_config.bin_width = r.f64();
  lib.quant_config.origin = r.f64();
  const bool clamped = r.u8() != 0;
  const double lo = r.f64();
  const double hi = r.f64();
  if (clamped) {
    lib.quant_config.clamp_lo = lo;
    lib.quant_config.clamp_hi = hi;
  }
  lib.extract_fingerprint = r.u64();
  lib.dim = r.u64();
  const std::uint64_t count = r.u64();
  // Each entry needs at least 4 + 8 + 8 bytes; reject absurd counts early.
  if (count > r.remaining() / 20) throw Error(ErrorCode::kTruncatedData, "entry count");
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    LibraryEntry e;
    e.source_id = r.str();
    e.signature.hash_seed = RandomSeed{r.u64()};
    const std::uint64_t k = r.u64();
    if (k != lib.sketch_config.k || e.signature.hash_seed != lib.sketch_config.hash_seed) {
      throw Error(ErrorCode::kIncompatibleSignatures, "entry '" + e.source_id + "'");
    }
    if (k > r.remaining() / 8) throw Error(ErrorCode::kTruncatedData, "signature");
    e.signature.minima.resize(k);
    for (auto& m : e.signature.minima) m = r.u64();
    if (!seen.insert(e.source_id).second) {
      throw Error(ErrorCode::kDuplicateSourceId, "'" + e.source_id + "'");
    }
    lib.entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::kMalformedFile, "trailing payload bytes");
  lib.sketch_config.validate();
  lib.quant_config.validate();
  return lib;
}

std::vector<std::uint8_t> save_model(const HeadModel& model) {
  ByteWriter w;
  w.u64(model.w.size());
  for (double x : model.w) w.f64(x);
  w.f64(model.b);
  return seal("DSHM", kModelVersion, w.take());
}

HeadModel load_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(unseal(bytes, "DSHM", kModelVersion));
  HeadModel m;
  const std::uint64_t d = r.u64();
  if (d > r.remaining() / 8) throw Error(ErrorCode::kTruncatedData, "weights");
  m.w.resize(d);
  for (double& x : m.w) x = r.f64();
  m.b = r.f64();
  if (r.remaining() != 0) throw Error(ErrorCode::kMalformedFile, "trailing payload bytes");
  for (double x : m.w) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteValue, "model weight");
  }
  if (!std::isfinite(m.b)) throw Error(ErrorCode::kNonFiniteValue, "model bias");
  return m;
}

}  // namespace driftsketch
