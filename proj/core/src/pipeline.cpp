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

#include "driftsketch/pipeline.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace driftsketch {

void PipelineConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw Error(ErrorCode::kConfigInvalid,
                "schema_version must be " + std::to_string(kSchemaVersion));
  }
  extract.validate();
  quant.validate();
  sketch.validate();
  gate.validate();
  stats.validate();
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kConfigInvalid,
              "bad value '" + std::string(value) + "' for " + std::string(key));
}

double to_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value);
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

}  // namespace

KeyValues to_key_values(const PipelineConfig& c) {
  KeyValues kv;
  kv.emplace_back("schema_version", std::to_string(c.schema_version));
  kv.emplace_back("extract.grid", std::to_string(c.extract.grid));
  kv.emplace_back("extract.hist_bins", std::to_string(c.extract.hist_bins));
  kv.emplace_back("extract.projection_dim", std::to_string(c.extract.projection_dim));
  kv.emplace_back("extract.projection_seed", std::to_string(c.extract.projection_seed.value));
  kv.emplace_back("extract.l2_normalize", c.extract.l2_normalize ? "true" : "false");
  kv.emplace_back("quant.bin_width", format_real(c.quant.bin_width));
  kv.emplace_back("quant.origin", format_real(c.quant.origin));
  kv.emplace_back("quant.clamp_lo", c.quant.clamp_lo ? format_real(*c.quant.clamp_lo) : "none");
  kv.emplace_back("quant.clamp_hi", c.quant.clamp_hi ? format_real(*c.quant.clamp_hi) : "none");
  kv.emplace_back("sketch.k", std::to_string(c.sketch.k));
  kv.emplace_back("sketch.hash_seed", std::to_string(c.sketch.hash_seed.value));
  kv.emplace_back("gate.j_alpha", format_real(c.gate.j_alpha));
  kv.emplace_back("gate.aggregation", std::string(to_string(c.gate.aggregation)));
  kv.emplace_back("stats.ks_alpha", format_real(c.stats.ks_alpha));
  kv.emplace_back("stats.cosine_mode", std::string(to_string(c.stats.cosine_mode)));
  kv.emplace_back("stats.pairwise_cap", std::to_string(c.stats.pairwise_cap));
  kv.emplace_back("stats.seed", std::to_string(c.stats.seed.value));
  return kv;
}

void apply_key_value(PipelineConfig& c, std::string_view key, std::string_view value) {
  if (key == "schema_version") {
    c.schema_version = static_cast<int>(to_u64(key, value));
  } else if (key == "extract.grid") {
    c.extract.grid = to_u64(key, value);
  } else if (key == "extract.hist_bins") {
    c.extract.hist_bins = to_u64(key, value);
  } else if (key == "extract.projection_dim") {
    c.extract.projection_dim = to_u64(key, value);
  } else if (key == "extract.projection_seed") {
    c.extract.projection_seed = RandomSeed{to_u64(key, value)};
  } else if (key == "extract.l2_normalize") {
    c.extract.l2_normalize = to_bool(key, value);
  } else if (key == "quant.bin_width") {
    c.quant.bin_width = to_real(key, value);
  } else if (key == "quant.origin") {
    c.quant.origin = to_real(key, value);
  } else if (key == "quant.clamp_lo") {
    c.quant.clamp_lo = value == "none" ? std::nullopt : std::optional(to_real(key, value));
  } else if (key == "quant.clamp_hi") {
    c.quant.clamp_hi = value == "none" ? std::nullopt : std::optional(to_real(key, value));
  } else if (key == "sketch.k") {
    c.sketch.k = to_u64(key, value);
  } else if (key == "sketch.hash_seed") {
    c.sketch.hash_seed = RandomSeed{to_u64(key, value)};
  } else if (key == "gate.j_alpha") {
    c.gate.j_alpha = to_real(key, value);
  } else if (key == "gate.aggregation") {
    c.gate.aggregation = parse_aggregation(value);
  } else if (key == "stats.ks_alpha") {
    c.stats.ks_alpha = to_real(key, value);
  } else if (key == "stats.cosine_mode") {
    c.stats.cosine_mode = parse_cosine_mode(value);
  } else if (key == "stats.pairwise_cap") {
    c.stats.pairwise_cap = to_u64(key, value);
  } else if (key == "stats.seed") {
    c.stats.seed = RandomSeed{to_u64(key, value)};
  } else {
    throw Error(ErrorCode::kConfigInvalid, "unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config_text(std::string_view text, PipelineConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigInvalid,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_key_value(base, trim(std::string_view(body).substr(0, eq)),
                    trim(std::string_view(body).substr(eq + 1)));
  }
  base.validate();
  return base;
}

std::string format_config_text(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace driftsketch
