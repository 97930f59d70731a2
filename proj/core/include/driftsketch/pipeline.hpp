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

#ifndef DRIFTSKETCH_PIPELINE_HPP_
#define DRIFTSKETCH_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftsketch/extract.hpp"
#include "driftsketch/sketch.hpp"
#include "driftsketch/stats.hpp"

namespace driftsketch {

inline constexpr int kSchemaVersion = 1;

struct PipelineConfig {
  ExtractConfig extract;
  QuantConfig quant;
  SketchConfig sketch;
  GateConfig gate;
  StatsConfig stats;
  int schema_version = kSchemaVersion;

  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat, ordered key=value view, e.g. {"extract.grid", "4"}. Reals are
// printed with 17 significant digits so the round trip is exact.
KeyValues to_key_values(const PipelineConfig& cfg);

// Applies one key. Throws kConfigInvalid on unknown keys or bad values.
void apply_key_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
// Unset keys keep the values already in `base`.
PipelineConfig parse_config_text(std::string_view text, PipelineConfig base = {});
std::string format_config_text(const PipelineConfig& cfg);

// Shortest-exact decimal rendering used across reports and configs.
std::string format_real(double x);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_PIPELINE_HPP_
