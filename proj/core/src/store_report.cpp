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

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "driftsketch/store.hpp"

namespace driftsketch {

namespace {

using nlohmann::json;

constexpr std::string_view kDriftCsvHeader =
    "baseline_id,period_id,n_images,ks_D,ks_p,cosine_score,gate_flag_count,drift_flag";
constexpr std::string_view kSweepCsvHeader = "noise,level,cosine,ks_D,ks_p,anomaly_rate";

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

void require_csv_safe(const std::string& s) {
  if (s.find_first_of(",\"\r\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidReport, "id '" + s + "' cannot be written to csv");
  }
}

std::string config_preamble(const KeyValues& config, ReportFormat format) {
  if (config.empty()) return {};
  if (format == ReportFormat::kCsv) {
    std::string out;
    for (const auto& [k, v] : config) out += "# " + k + " = " + v + "\n";
    return out;
  }
  std::string out = "{\"record\":\"config\"";
  for (const auto& [k, v] : config) out += "," + json_string(k) + ":" + json_string(v);
  return out + "}\n";
}

std::vector<std::string_view> data_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') out.push_back(line);
    start = nl + 1;
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_report(const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, "report: " + what);
}

double real_field(std::string_view s) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_report("bad number '" + std::string(s) + "'");
  return out;
}

std::size_t count_field(std::string_view s) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_report("bad count '" + std::string(s) + "'");
  return out;
}

bool bool_field(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  bad_report("bad flag '" + std::string(s) + "'");
}

std::vector<json> json_records(std::string_view text) {
  std::vector<json> out;
  for (auto line : data_lines(text)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad_report("line is not a json object");
    if (j.contains("record") && j["record"] == "config") continue;
    out.push_back(std::move(j));
  }
  return out;
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) bad_report(std::string("missing field ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_report(std::string("bad field ") + key);
  }
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "jsonl") return ReportFormat::kJsonl;
  if (name == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kConfigInvalid, "format must be jsonl or csv, got '" + std::string(name) + "'");
}

std::string format_report(const DriftReport& report, ReportFormat format,
                          const KeyValues& config) {
  std::string out = config_preamble(config, format);
  if (format == ReportFormat::kCsv) {
    require_csv_safe(report.baseline_id);
    out += std::string(kDriftCsvHeader) + "\n";
    for (const auto& p : report.periods) {
      require_csv_safe(p.period_id);
      out += report.baseline_id + "," + p.period_id + "," + std::to_string(p.n_images) + "," +
             format_real(p.ks_d) + "," + format_real(p.ks_p) + "," +
             format_real(p.cosine_score) + "," + std::to_string(p.gate_flag_count) + "," +
             (p.drift_flag ? "true" : "false") + "\n";
    }
    return out;
  }
  for (const auto& p : report.periods) {
    out += "{\"baseline_id\":" + json_string(report.baseline_id) +
           ",\"period_id\":" + json_string(p.period_id) +
           ",\"n_images\":" + std::to_string(p.n_images) +
           ",\"ks_D\":" + format_real(p.ks_d) + ",\"ks_p\":" + format_real(p.ks_p) +
           ",\"cosine_score\":" + format_real(p.cosine_score) +
           ",\"gate_flag_count\":" + std::to_string(p.gate_flag_count) +
           ",\"drift_flag\":" + (p.drift_flag ? "true" : "false") + "}\n";
  }
  return out;
}

std::string format_report(const SensitivityReport& report, ReportFormat format,
                          const KeyValues& config) {
  std::string out = config_preamble(config, format);
  const std::string kind(to_string(report.kind));
  if (format == ReportFormat::kCsv) {
    out += std::string(kSweepCsvHeader) + "\n";
    for (const auto& r : report.rows) {
      out += kind + "," + format_real(r.level) + "," + format_real(r.cosine) + "," +
             format_real(r.ks_d) + "," + format_real(r.ks_p) + "," +
             format_real(r.anomaly_rate) + "\n";
    }
    return out;
  }
  for (const auto& r : report.rows) {
    out += "{\"noise\":" + json_string(kind) + ",\"level\":" + format_real(r.level) +
           ",\"cosine\":" + format_real(r.cosine) + ",\"ks_D\":" + format_real(r.ks_d) +
           ",\"ks_p\":" + format_real(r.ks_p) +
           ",\"anomaly_rate\":" + format_real(r.anomaly_rate) + "}\n";
  }
  return out;
}

DriftReport parse_drift_report(std::string_view text, ReportFormat format) {
  DriftReport report;
  if (format == ReportFormat::kCsv) {
    const auto lines = data_lines(text);
    if (lines.empty() || lines[0] != kDriftCsvHeader) bad_report("missing csv header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_commas(lines[i]);
      if (f.size() != 8) bad_report("expected 8 columns");
      report.baseline_id = std::string(f[0]);
      report.periods.push_back(PeriodStats{std::string(f[1]), count_field(f[2]),
                                           real_field(f[3]), real_field(f[4]),
                                           real_field(f[5]), count_field(f[6]),
                                           bool_field(f[7])});
    }
    return report;
  }
  for (const auto& j : json_records(text)) {
    report.baseline_id = get_field<std::string>(j, "baseline_id");
    report.periods.push_back(PeriodStats{
        get_field<std::string>(j, "period_id"), get_field<std::size_t>(j, "n_images"),
        get_field<double>(j, "ks_D"), get_field<double>(j, "ks_p"),
        get_field<double>(j, "cosine_score"), get_field<std::size_t>(j, "gate_flag_count"),
        get_field<bool>(j, "drift_flag")});
  }
  return report;
}

SensitivityReport parse_sensitivity_report(std::string_view text, ReportFormat format) {
  SensitivityReport report;
  if (format == ReportFormat::kCsv) {
    const auto lines = data_lines(text);
    if (lines.empty() || lines[0] != kSweepCsvHeader) bad_report("missing csv header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_commas(lines[i]);
      if (f.size() != 6) bad_report("expected 6 columns");
      report.kind = parse_noise_kind(f[0]);
      report.rows.push_back(SensitivityRow{real_field(f[1]), real_field(f[2]),
                                           real_field(f[3]), real_field(f[4]),
                                           real_field(f[5])});
    }
    return report;
  }
  for (const auto& j : json_records(text)) {
    report.kind = parse_noise_kind(get_field<std::string>(j, "noise"));
    report.rows.push_back(SensitivityRow{
        get_field<double>(j, "level"), get_field<double>(j, "cosine"),
        get_field<double>(j, "ks_D"), get_field<double>(j, "ks_p"),
        get_field<double>(j, "anomaly_rate")});
  }
  return report;
}

void write_report(const DriftReport& report, ReportFormat format,
                  const std::filesystem::path& path, double ks_alpha,
                  const KeyValues& config) {
  report.validate(ks_alpha);
  write_file_atomic(path, format_report(report, format, config));
}

void write_report(const SensitivityReport& report, ReportFormat format,
                  const std::filesystem::path& path, const KeyValues& config) {
  report.validate();
  write_file_atomic(path, format_report(report, format, config));
}

}  // namespace driftsketch
