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

#include "driftsketch_cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftsketch/extract.hpp"
#include "driftsketch/head.hpp"
#include "driftsketch/noise.hpp"
#include "driftsketch/pipeline.hpp"
#include "driftsketch/sketch.hpp"
#include "driftsketch/stats.hpp"
#include "driftsketch/store.hpp"

namespace driftsketch::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// Raised for bad flag values that CLI11 cannot check by itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  std::optional<double> j_alpha;
  std::optional<double> ks_alpha;
  std::string format = "jsonl";
  std::string out;

  std::string images;
  std::string embeddings;
  std::string library;
  std::string baseline;
  std::vector<std::string> periods;
  std::string test_images;
  std::string noise;
  std::string levels;
  std::string labels;
  std::string curve;
  std::string ids;
  std::size_t groups = 0;
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  bool no_bias_correction = false;
};

struct Features {
  std::vector<FeatureVector> items;
  std::uint64_t fingerprint = 0;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kInvalidLevels:
    case ErrorCode::kInvalidSigma:
    case ErrorCode::kInvalidFraction:
    case ErrorCode::kInvalidVariance:
    case ErrorCode::kInvalidLevel:
      return kExitUsage;
    default:
      return kExitData;
  }
}

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig cfg;
  if (!o.config_path.empty()) {
    std::string text;
    try {
      text = read_file_text(o.config_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigInvalid, e.detail());
    }
    cfg = parse_config_text(text);
  }
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_key_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.j_alpha) cfg.gate.j_alpha = *o.j_alpha;
  if (o.ks_alpha) cfg.stats.ks_alpha = *o.ks_alpha;
  cfg.stats.seed = RandomSeed{o.seed};
  cfg.validate();
  return cfg;
}

KeyValues resolved(const PipelineConfig& cfg, const std::string& command, const Options& o,
                   KeyValues extra = {}) {
  KeyValues kv = to_key_values(cfg);
  kv.emplace_back("run.command", command);
  kv.emplace_back("run.seed", std::to_string(o.seed));
  for (auto& e : extra) kv.push_back(std::move(e));
  return kv;
}

Features features_from_images(const fs::path& dir, const ExtractConfig& cfg) {
  ImageSet set = load_image_dir(dir);
  if (set.images.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no .pgm/.ppm images in " + dir.string());
  }
  return Features{extract_batch(set.images, cfg, set.ids), cfg.fingerprint()};
}

Features features_from_embeddings(const fs::path& file) {
  Features f;
  f.items = read_embedding_file(file);
  if (f.items.empty()) throw Error(ErrorCode::kEmptyInput, file.string() + " has no records");
  f.fingerprint = embedding_fingerprint(f.items.front().dim());
  return f;
}

// Directories hold images; anything else is an embedding file.
Features features_from_path(const fs::path& p, const ExtractConfig& cfg) {
  return fs::is_directory(p) ? features_from_images(p, cfg) : features_from_embeddings(p);
}

Features features_from_flags(const Options& o, const ExtractConfig& cfg) {
  return o.images.empty() ? features_from_embeddings(o.embeddings)
                          : features_from_images(o.images, cfg);
}

std::string input_id(const fs::path& p) {
  fs::path clean = p;
  if (!clean.has_filename()) clean = clean.parent_path();
  return clean.stem().string();
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* first = item.data();
    const char* last = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (item.empty() || ec != std::errc() || ptr != last) {
      throw UsageError("--levels: bad number '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_file_atomic(o.out, text);
  }
}

int cmd_extract(const Options& o) {
  const PipelineConfig cfg = resolve_config(o);
  const Features f = features_from_flags(o, cfg.extract);
  write_embedding_file(f.items, o.out, resolved(cfg, "extract", o));
  return kExitClean;
}

int cmd_build_baseline(const Options& o) {
  const PipelineConfig cfg = resolve_config(o);
  const Features f = features_from_flags(o, cfg.extract);
  const SketchLibrary lib = build_library(f.items, cfg.quant, cfg.sketch, f.fingerprint);
  write_file_atomic(o.out, save_library(lib));
  return kExitClean;
}

int cmd_gate(const Options& o, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(o);
  const ReportFormat format = parse_report_format(o.format);
  const SketchLibrary lib = load_library(read_file_bytes(o.library));
  const Features f = features_from_flags(o, cfg.extract);
  const Gate gate(lib, cfg.gate, f.fingerprint);
  const KeyValues config = resolved(cfg, "gate", o);

  std::string text;
  if (format == ReportFormat::kCsv) {
    for (const auto& [k, v] : config) text += "# " + k + " = " + v + "\n";
    text += "id,verdict,score\n";
  } else {
    ordered_json head;
    head["record"] = "config";
    for (const auto& [k, v] : config) head[k] = v;
    text += head.dump() + "\n";
  }
  bool any_anomalous = false;
  for (const auto& item : f.items) {
    const GateResult r = gate.check(item);
    any_anomalous = any_anomalous || r.verdict == Verdict::kAnomalous;
    if (format == ReportFormat::kCsv) {
      if (item.source_id.find_first_of(",\"") != std::string::npos) {
        throw Error(ErrorCode::kInvalidReport, "id '" + item.source_id + "' cannot be written to csv");
      }
      text += item.source_id + "," + std::string(to_string(r.verdict)) + "," +
              format_real(r.score) + "\n";
    } else {
      ordered_json line;
      line["id"] = item.source_id;
      line["verdict"] = to_string(r.verdict);
      line["score"] = r.score;
      text += line.dump() + "\n";
    }
  }
  emit(text, o, out);
  return any_anomalous ? kExitDetection : kExitClean;
}

int cmd_drift(const Options& o, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(o);
  const ReportFormat format = parse_report_format(o.format);
  const Features base = features_from_path(o.baseline, cfg.extract);

  SketchLibrary lib;
  if (o.library.empty()) {
    lib = build_library(base.items, cfg.quant, cfg.sketch, base.fingerprint);
  } else {
    lib = load_library(read_file_bytes(o.library));
  }

  std::vector<Period> periods;
  std::vector<std::size_t> flags;
  std::uint64_t fingerprint = base.fingerprint;
  for (const auto& p : o.periods) {
    Features f = features_from_path(p, cfg.extract);
    if (f.fingerprint != fingerprint) {
      throw Error(ErrorCode::kIncompatibleConfig,
                  "period '" + p + "' features differ in kind or dimension from the baseline");
    }
    const Gate gate(lib, cfg.gate, f.fingerprint);
    std::size_t n = 0;
    for (const auto& item : f.items) n += gate.check(item).verdict == Verdict::kAnomalous;
    flags.push_back(n);
    periods.push_back(Period{input_id(p), std::move(f.items)});
  }

  const DriftReport report =
      drift_report(input_id(o.baseline), base.items, periods, cfg.stats, flags);
  const KeyValues config = resolved(cfg, "drift", o);
  if (o.out.empty()) {
    report.validate(cfg.stats.ks_alpha);
    out << format_report(report, format, config);
  } else {
    write_report(report, format, o.out, cfg.stats.ks_alpha, config);
  }
  const bool drift = std::any_of(report.periods.begin(), report.periods.end(),
                                 [](const PeriodStats& p) { return p.drift_flag; });
  return drift ? kExitDetection : kExitClean;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(o);
  const ReportFormat format = parse_report_format(o.format);
  const NoiseKind kind = parse_noise_kind(o.noise);
  const std::vector<double> levels = parse_levels(o.levels);
  const ImageSet base = load_image_dir(o.baseline);
  const ImageSet test = load_image_dir(o.test_images);
  const SensitivityReport report =
      sensitivity_sweep(base.images, test.images, kind, levels, cfg, RandomSeed{o.seed});
  const KeyValues config =
      resolved(cfg, "sweep", o, {{"run.noise", std::string(to_string(kind))}, {"run.levels", o.levels}});
  if (o.out.empty()) {
    report.validate();
    out << format_report(report, format, config);
  } else {
    write_report(report, format, o.out, config);
  }
  return kExitClean;
}

int cmd_train_head(const Options& o, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(o);
  TrainConfig tc;
  if (o.lr) tc.lr = *o.lr;
  if (o.epochs) tc.epochs = *o.epochs;
  if (o.batch_size) tc.batch_size = *o.batch_size;
  tc.bias_correction = !o.no_bias_correction;
  tc.seed = RandomSeed{o.seed};
  tc.validate();

  const std::vector<FeatureVector> emb = read_embedding_file(o.embeddings);
  const auto labels = read_label_file(o.labels);
  std::vector<LabeledSample> data;
  data.reserve(emb.size());
  for (const auto& v : emb) {
    const auto it = labels.find(v.source_id);
    if (it == labels.end()) {
      throw Error(ErrorCode::kMalformedFile, "no label for record '" + v.source_id + "'");
    }
    data.push_back(LabeledSample{v, it->second});
  }
  const TrainResult r = train_head(data, tc);
  write_file_atomic(o.out, save_model(r.model));

  const KeyValues config = resolved(
      cfg, "train-head", o,
      {{"train.lr", format_real(tc.lr)}, {"train.beta1", format_real(tc.beta1)},
       {"train.beta2", format_real(tc.beta2)}, {"train.epsilon", format_real(tc.epsilon)},
       {"train.epochs", std::to_string(tc.epochs)}, {"train.batch_size", std::to_string(tc.batch_size)},
       {"train.bias_correction", tc.bias_correction ? "true" : "false"}});
  std::string curve;
  for (const auto& [k, v] : config) curve += "# " + k + " = " + v + "\n";
  curve += "epoch,loss\n";
  for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
    curve += std::to_string(e + 1) + "," + format_real(r.epoch_loss[e]) + "\n";
  }
  write_file_atomic(o.curve.empty() ? o.out + ".curve.csv" : o.curve, curve);
  out << "train accuracy " << format_real(accuracy(r.model, data)) << "\n";
  return kExitClean;
}

std::vector<std::string> read_id_list(const fs::path& file) {
  std::vector<std::string> ids;
  std::stringstream ss(read_file_text(file));
  std::string line;
  while (std::getline(ss, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(first, last - first + 1));
  }
  return ids;
}

int cmd_split(const Options& o) {
  std::vector<std::string> ids;
  if (!o.ids.empty()) {
    ids = read_id_list(o.ids);
  } else {
    ids = load_image_dir(o.images).ids;
  }
  const SplitPlan plan = split_dataset(ids, o.groups, RandomSeed{o.seed});
  write_file_atomic(o.out, format_split(plan));
  return kExitClean;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "Key-value config file (flags override it)");
  sub->add_option("--seed", o.seed, "Run seed")->capture_default_str();
  sub->add_option("--set", o.overrides, "Config override key=value (repeatable)");
  sub->add_option("--j-alpha", o.j_alpha, "Gate threshold (gate.j_alpha)");
  sub->add_option("--ks-alpha", o.ks_alpha, "Drift significance level (stats.ks_alpha)");
}

void add_format(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"jsonl", "csv"}))
      ->capture_default_str();
}

void add_feature_inputs(CLI::App* sub, Options& o) {
  auto* images = sub->add_option("--images", o.images, "Directory of .pgm/.ppm images");
  auto* emb = sub->add_option("--embeddings", o.embeddings, "Embedding file");
  images->excludes(emb);
  emb->excludes(images);
  sub->callback([sub] {
    if (sub->count("--images") + sub->count("--embeddings") != 1) {
      throw CLI::RequiredError("exactly one of --images or --embeddings");
    }
  });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sketch-based data drift detection for image pipelines", "driftsketch"};
  app.require_subcommand(1);
  Options o;

  auto* extract = app.add_subcommand("extract", "Images or embeddings to an embedding file");
  add_common(extract, o);
  add_feature_inputs(extract, o);
  extract->add_option("--out", o.out, "Output embedding file")->required();

  auto* baseline = app.add_subcommand("build-baseline", "Build a sketch library");
  add_common(baseline, o);
  add_feature_inputs(baseline, o);
  baseline->add_option("--out", o.out, "Output library file")->required();

  auto* gate = app.add_subcommand("gate", "Per-item acceptable/anomalous verdicts");
  add_common(gate, o);
  add_format(gate, o);
  add_feature_inputs(gate, o);
  gate->add_option("--library", o.library, "Sketch library file")->required();
  gate->add_option("--out", o.out, "Output file (default stdout)");

  auto* drift = app.add_subcommand("drift", "Drift report over ordered periods");
  add_common(drift, o);
  add_format(drift, o);
  drift->add_option("--baseline", o.baseline, "Baseline image directory or embedding file")
      ->required();
  drift->add_option("--period", o.periods, "Period image directory or embedding file (repeatable, in order)")
      ->required();
  drift->add_option("--library", o.library, "Sketch library for gate counts (default: built from baseline)");
  drift->add_option("--out", o.out, "Output report (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "Noise sensitivity sweep");
  add_common(sweep, o);
  add_format(sweep, o);
  sweep->add_option("--baseline", o.baseline, "Baseline image directory")->required();
  sweep->add_option("--images", o.test_images, "Test image directory")->required();
  sweep->add_option("--noise", o.noise, "gaussian|salt-pepper|speckle|poisson")->required();
  sweep->add_option("--levels", o.levels, "Comma-separated increasing levels")->required();
  sweep->add_option("--out", o.out, "Output report (default stdout)");

  auto* train = app.add_subcommand("train-head", "Train the logistic head");
  add_common(train, o);
  train->add_option("--embeddings", o.embeddings, "Embedding file")->required();
  train->add_option("--labels", o.labels, "Label file of '<id> <0|1>' lines")->required();
  train->add_option("--out", o.out, "Output model file")->required();
  train->add_option("--curve", o.curve, "Learning-curve csv (default <out>.curve.csv)");
  train->add_option("--lr", o.lr, "Learning rate");
  train->add_option("--epochs", o.epochs, "Epochs");
  train->add_option("--batch-size", o.batch_size, "Mini-batch size");
  train->add_flag("--no-bias-correction", o.no_bias_correction, "Disable Adam bias correction");

  auto* split = app.add_subcommand("split", "Seeded split of ids into groups");
  add_common(split, o);
  auto* ids = split->add_option("--ids", o.ids, "File with one id per line");
  auto* split_images = split->add_option("--images", o.images, "Image directory (ids are file stems)");
  ids->excludes(split_images);
  split_images->excludes(ids);
  split->add_option("--groups", o.groups, "Number of groups")->required();
  split->add_option("--out", o.out, "Output split file")->required();
  split->callback([split] {
    if (split->count("--ids") + split->count("--images") != 1) {
      throw CLI::RequiredError("exactly one of --ids or --images");
    }
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(o);
    if (baseline->parsed()) return cmd_build_baseline(o);
    if (gate->parsed()) return cmd_gate(o, out);
    if (drift->parsed()) return cmd_drift(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (train->parsed()) return cmd_train_head(o, out);
    if (split->parsed()) return cmd_split(o);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    err << (code == kExitUsage ? "config error: " : "data error: ") << e.what() << "\n";
    return code;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace driftsketch::cli
