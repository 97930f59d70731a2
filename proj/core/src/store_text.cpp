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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "driftsketch/store.hpp"

namespace driftsketch {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_f64(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_field(std::string_view token, std::string_view name, std::uint64_t& out) {
  if (token.substr(0, name.size()) != name) return false;
  return parse_u64(token.substr(name.size()), out);
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<FeatureVector> parse_embeddings(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) malformed(1, "missing header");
  const auto head = split_ws(lines[0]);
  std::uint64_t dim = 0;
  std::uint64_t count = 0;
  if (head.size() != 4 || head[0] != "driftsketch-emb" || head[1] != "v1" ||
      !parse_field(head[2], "dim=", dim) || !parse_field(head[3], "count=", count)) {
    malformed(1, "expected 'driftsketch-emb v1 dim=<d> count=<n>'");
  }
  std::vector<FeatureVector> out;
  std::unordered_set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = split_ws(lines[li]);
    if (fields.empty() || fields[0].front() == '#') continue;
    FeatureVector v;
    v.source_id = std::string(fields[0]);
    if (fields.size() - 1 != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "record '" + v.source_id + "' has " + std::to_string(fields.size() - 1) +
                      " values, header says dim=" + std::to_string(dim));
    }
    v.values.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_f64(fields[j + 1], v.values[j])) {
        malformed(li + 1, "bad number '" + std::string(fields[j + 1]) + "'");
      }
    }
    require_finite(v);
    if (!seen.insert(v.source_id).second) {
      throw Error(ErrorCode::kDuplicateSourceId, "'" + v.source_id + "'");
    }
    out.push_back(std::move(v));
  }
  if (out.size() != count) {
    malformed(lines.size(), "header count=" + std::to_string(count) + " but " +
                                std::to_string(out.size()) + " records");
  }
  return out;
}

std::vector<FeatureVector> read_embedding_file(const std::filesystem::path& path) {
  try {
    return parse_embeddings(read_file_text(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string format_embeddings(std::span<const FeatureVector> vs, const KeyValues& config) {
  const std::size_t d = require_uniform_dim(vs);
  std::string out = "driftsketch-emb v1 dim=" + std::to_string(d) +
                    " count=" + std::to_string(vs.size()) + "\n";
  for (const auto& [k, v] : config) out += "# " + k + " = " + v + "\n";
  for (const auto& v : vs) {
    if (v.source_id.empty() || v.source_id.front() == '#' ||
        v.source_id.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error(ErrorCode::kMalformedFile, "id '" + v.source_id + "' is empty or has whitespace");
    }
    require_finite(v);
    out += v.source_id;
    for (double x : v.values) {
      out += ' ';
      out += format_real(x);
    }
    out += '\n';
  }
  return out;
}

void write_embedding_file(std::span<const FeatureVector> vs,
                          const std::filesystem::path& path, const KeyValues& config) {
  write_file_atomic(path, format_embeddings(vs, config));
}

std::map<std::string, int> parse_labels(std::string_view text) {
  std::map<std::string, int> out;
  const auto lines = lines_of(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 2 || (f[1] != "0" && f[1] != "1")) malformed(li + 1, "expected '<id> <0|1>'");
    if (!out.emplace(std::string(f[0]), f[1] == "1" ? 1 : 0).second) {
      throw Error(ErrorCode::kDuplicateSourceId, "'" + std::string(f[0]) + "'");
    }
  }
  return out;
}

std::map<std::string, int> read_label_file(const std::filesystem::path& path) {
  return parse_labels(read_file_text(path));
}

std::vector<std::vector<std::string>> SplitPlan::groups() const {
  std::vector<std::vector<std::string>> out(n_groups);
  for (const auto& [id, g] : assignment) out.at(g).push_back(id);
  return out;
}

SplitPlan split_dataset(std::span<const std::string> ids, std::size_t n_groups,
                        RandomSeed seed) {
  if (n_groups < 2) throw Error(ErrorCode::kConfigInvalid, "n_groups must be >= 2");
  if (ids.size() < n_groups) {
    throw Error(ErrorCode::kTooFewIds, std::to_string(ids.size()) + " ids for " +
                                           std::to_string(n_groups) + " groups");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateIds, "'" + id + "'");
  }
  std::vector<std::string> order(ids.begin(), ids.end());
  RandomStream rng = seeded_rng(seed, "store/split");
  // Fisher-Yates with the stream's own bounded draw keeps the plan
  // independent of the standard library's shuffle algorithm.
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  SplitPlan plan;
  plan.n_groups = n_groups;
  plan.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    plan.assignment.emplace_back(std::move(order[i]), i % n_groups);
  }
  return plan;
}

std::string format_split(const SplitPlan& plan) {
  std::string out = "driftsketch-split v1 groups=" + std::to_string(plan.n_groups) +
                    " seed=" + std::to_string(plan.seed.value) + "\n";
  for (const auto& [id, g] : plan.assignment) out += id + " " + std::to_string(g) + "\n";
  return out;
}

SplitPlan parse_split(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) malformed(1, "missing header");
  const auto head = split_ws(lines[0]);
  SplitPlan plan;
  std::uint64_t groups = 0;
  if (head.size() != 4 || head[0] != "driftsketch-split" || head[1] != "v1" ||
      !parse_field(head[2], "groups=", groups) || !parse_field(head[3], "seed=", plan.seed.value)) {
    malformed(1, "expected 'driftsketch-split v1 groups=<n> seed=<s>'");
  }
  plan.n_groups = groups;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split_ws(lines[li]);
    if (f.empty()) continue;
    std::uint64_t g = 0;
    if (f.size() != 2 || !parse_u64(f[1], g) || g >= groups) malformed(li + 1, "bad assignment");
    plan.assignment.emplace_back(std::string(f[0]), g);
  }
  return plan;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(contents.data()),
                              contents.size()));
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(contents.data()),
              static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string());
  }
}

}  // namespace driftsketch
