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

#ifndef DRIFTSKETCH_STORE_HPP_
#define DRIFTSKETCH_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftsketch/core.hpp"
#include "driftsketch/head.hpp"
#include "driftsketch/noise.hpp"
#include "driftsketch/pipeline.hpp"
#include "driftsketch/sketch.hpp"
#include "driftsketch/stats.hpp"

namespace driftsketch {

// ---------------------------------------------------------------------------
// Images: 8-bit binary PGM (P5) and PPM (P6), maxval 255. '#' comments are
// allowed in the header.

ImageGrid decode_pnm(std::span<const std::uint8_t> bytes);
ImageGrid load_image(const std::filesystem::path& path);

// Quantizes with round(v * 255).
std::vector<std::uint8_t> encode_pnm(const ImageGrid& img);
void save_image(const ImageGrid& img, const std::filesystem::path& path);

// Every *.pgm / *.ppm file in `dir`, sorted by file name. ids are file stems.
struct ImageSet {
  std::vector<std::string> ids;
  std::vector<ImageGrid> images;
};
ImageSet load_image_dir(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Embedding files:
//
//   driftsketch-emb v1 dim=<d> count=<n>
//   <id> <v1> ... <vd>
//   ...
//
// Space-separated, reals in decimal or scientific notation.

std::vector<FeatureVector> parse_embeddings(std::string_view text);
std::vector<FeatureVector> read_embedding_file(const std::filesystem::path& path);
std::string format_embeddings(std::span<const FeatureVector> vs,
                              const KeyValues& config = {});
void write_embedding_file(std::span<const FeatureVector> vs,
                          const std::filesystem::path& path,
                          const KeyValues& config = {});

// Label files for head training: "<id> <0|1>" per line, '#' comments.
std::map<std::string, int> parse_labels(std::string_view text);
std::map<std::string, int> read_label_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Binary containers. Layout, all integers little-endian:
//
//   magic[4] | version u16 | payload_len u64 | payload | fnv1a64(payload) u64
//
// Libraries use magic "DSKL", head models "DSHM".

std::vector<std::uint8_t> save_library(const SketchLibrary& lib);
SketchLibrary load_library(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> save_model(const HeadModel& model);
HeadModel load_model(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Reports. Reals use 17 significant digits; files end with a newline.
//
// DriftReport csv header:
//   baseline_id,period_id,n_images,ks_D,ks_p,cosine_score,gate_flag_count,drift_flag
// DriftReport jsonl: one object per period with the same field names.
//
// SensitivityReport csv header:
//   noise,level,cosine,ks_D,ks_p,anomaly_rate
// SensitivityReport jsonl: one object per level with the same field names.
//
// When a config is supplied it is embedded ahead of the records: as
// "# key = value" comment lines in csv, and as a first jsonl line
// {"record":"config", ...}. Readers skip both.

enum class ReportFormat { kJsonl, kCsv };

ReportFormat parse_report_format(std::string_view name);

std::string format_report(const DriftReport& report, ReportFormat format,
                          const KeyValues& config = {});
std::string format_report(const SensitivityReport& report, ReportFormat format,
                          const KeyValues& config = {});

DriftReport parse_drift_report(std::string_view text, ReportFormat format);
SensitivityReport parse_sensitivity_report(std::string_view text, ReportFormat format);

// Rejects reports failing their own validation before writing.
void write_report(const DriftReport& report, ReportFormat format,
                  const std::filesystem::path& path, double ks_alpha,
                  const KeyValues& config = {});
void write_report(const SensitivityReport& report, ReportFormat format,
                  const std::filesystem::path& path, const KeyValues& config = {});

// ---------------------------------------------------------------------------
// Dataset splitting.

struct SplitPlan {
  std::size_t n_groups = 0;
  RandomSeed seed{0};
  // In shuffled order; group of the i-th shuffled id is i mod n_groups.
  std::vector<std::pair<std::string, std::size_t>> assignment;

  std::vector<std::vector<std::string>> groups() const;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

SplitPlan split_dataset(std::span<const std::string> ids, std::size_t n_groups,
                        RandomSeed seed);

// "driftsketch-split v1 groups=<n> seed=<s>" then "<id> <group>" per line.
std::string format_split(const SplitPlan& plan);
SplitPlan parse_split(std::string_view text);

// ---------------------------------------------------------------------------
// Files

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> contents);

}  // namespace driftsketch

#endif  // DRIFTSKETCH_STORE_HPP_
