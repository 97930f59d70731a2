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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "driftsketch/noise.hpp"
#include "driftsketch/store.hpp"
#include "support/synth.hpp"

namespace driftsketch {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write_images(const fs::path& dir, const std::vector<ImageGrid>& images) {
  fs::create_directories(dir);
  const auto ids = testing::numbered_ids("img", images.size());
  for (std::size_t i = 0; i < images.size(); ++i) save_image(images[i], dir / (ids[i] + ".pgm"));
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root = new fs::path(fs::temp_directory_path() /
                        ("driftsketch_cli_" + std::to_string(::getpid())));
    fs::remove_all(*root);
    const testing::StructuredImageGenerator gen;
    const auto base = gen.batch(RandomSeed{100}, 100);
    write_images(*root / "base", base);
    write_images(*root / "base_copy", base);
    for (int p = 1; p <= 7; ++p) {
      auto images = gen.batch(RandomSeed{200 + static_cast<std::uint64_t>(p)}, 50);
      if (p >= 4) {
        for (std::size_t i = 0; i < images.size(); ++i) {
          images[i] = salt_pepper(images[i], 0.01, RandomSeed{1000u * p + i});
        }
      }
      write_images(*root / ("month" + std::to_string(p)), images);
    }
    std::vector<ImageGrid> noise;
    for (std::uint64_t i = 0; i < 5; ++i) noise.push_back(testing::uniform_noise_image(28, 28, RandomSeed{i}));
    write_images(*root / "noise", noise);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root);
    delete root;
  }
  static std::string path(const std::string& name) { return (*root / name).string(); }

  std::vector<std::string> seven_periods() const {
    std::vector<std::string> args = {"drift", "--baseline", path("base")};
    for (int p = 1; p <= 7; ++p) {
      args.push_back("--period");
      args.push_back(path("month" + std::to_string(p)));
    }
    return args;
  }

  static fs::path* root;
};

fs::path* CliTest::root = nullptr;

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"split", "--ids", "x", "--groups", "2", "--out", "y", "--frobnicate"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"gate", "--images", path("base")}).code, cli::kExitUsage);  // no --library
  EXPECT_EQ(run({"drift", "--baseline", path("base"), "--period", path("month1"), "--format", "xml"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"sweep", "--baseline", path("base"), "--images", path("month1"), "--noise", "blur",
                 "--levels", "0,0.1"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"sweep", "--baseline", path("base"), "--images", path("month1"), "--noise", "gaussian",
                 "--levels", "0,abc"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"sweep", "--baseline", path("base"), "--images", path("month1"), "--noise", "gaussian",
                 "--levels", "0.2,0.1"})
                .code,
            cli::kExitUsage);
  const CliRun bad_key = run({"drift", "--baseline", path("base"), "--period", path("month1"), "--set", "gate.nope=1"});
  EXPECT_EQ(bad_key.code, cli::kExitUsage);
  EXPECT_NE(bad_key.err.find("config-invalid"), std::string::npos);
  EXPECT_EQ(run({"drift", "--baseline", path("base"), "--period", path("month1"), "--j-alpha", "3"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"drift", "--baseline", path("base"), "--period", path("month1"), "--config",
                 path("missing.cfg")})
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, HelpExitsZero) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, cli::kExitClean);
  EXPECT_NE(r.out.find("build-baseline"), std::string::npos);
}

TEST_F(CliTest, DataErrorsExitThreeAndAreNamed) {
  const CliRun r = run({"build-baseline", "--images", path("does-not-exist"), "--out", path("x.dskl")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("io-error"), std::string::npos);
  write_file_atomic(*root / "bad.dskl", std::string_view("nope"));
  const CliRun bad = run({"gate", "--library", path("bad.dskl"), "--images", path("base")});
  EXPECT_EQ(bad.code, cli::kExitData);
  EXPECT_NE(bad.err.find("bad-magic"), std::string::npos);
}

TEST_F(CliTest, GateAcceptsBaselineAndFlagsNoise) {
  ASSERT_EQ(run({"build-baseline", "--images", path("base"), "--out", path("lib.dskl")}).code, 0);
  const CliRun clean = run({"gate", "--library", path("lib.dskl"), "--images", path("base_copy")});
  EXPECT_EQ(clean.code, cli::kExitClean);
  EXPECT_EQ(clean.out.find("\"anomalous\""), std::string::npos);
  EXPECT_EQ(clean.out.rfind("{\"record\":\"config\"", 0), 0u);

  const CliRun noisy = run({"gate", "--library", path("lib.dskl"), "--images", path("noise"), "--format", "csv"});
  EXPECT_EQ(noisy.code, cli::kExitDetection);
  EXPECT_NE(noisy.out.find("\nid,verdict,score\n"), std::string::npos);
  EXPECT_EQ(noisy.out.find(",acceptable,"), std::string::npos);
}

TEST_F(CliTest, EmbeddingsWorkflow) {
  ASSERT_EQ(run({"extract", "--images", path("base"), "--out", path("base.emb")}).code, 0);
  const auto emb = read_embedding_file(*root / "base.emb");
  EXPECT_EQ(emb.size(), 100u);
  EXPECT_EQ(emb.front().source_id, "img0000");
  EXPECT_NE(read_file_text(*root / "base.emb").find("# run.command = extract"), std::string::npos);

  ASSERT_EQ(run({"build-baseline", "--embeddings", path("base.emb"), "--out", path("emb.dskl")}).code, 0);
  EXPECT_EQ(run({"gate", "--library", path("emb.dskl"), "--embeddings", path("base.emb")}).code, 0);
  // Image features never match a library built from an embedding file.
  const CliRun mixed = run({"gate", "--library", path("emb.dskl"), "--images", path("base")});
  EXPECT_EQ(mixed.code, cli::kExitData);
  EXPECT_NE(mixed.err.find("incompatible-config"), std::string::npos);
}

TEST_F(CliTest, DriftOnBaselineCopiesIsClean) {
  const CliRun r = run({"drift", "--baseline", path("base"), "--period", path("base_copy"), "--format", "csv"});
  EXPECT_EQ(r.code, cli::kExitClean);
  const DriftReport report = parse_drift_report(r.out, ReportFormat::kCsv);
  ASSERT_EQ(report.periods.size(), 1u);
  EXPECT_EQ(report.periods[0].ks_p, 1.0);
  EXPECT_EQ(report.periods[0].gate_flag_count, 0u);
  EXPECT_EQ(report.baseline_id, "base");
}

TEST_F(CliTest, DriftFlagsCorruptedPeriods) {
  auto args = seven_periods();
  args.insert(args.end(), {"--out", path("drift.jsonl")});
  ASSERT_EQ(run(args).code, cli::kExitDetection);
  const DriftReport report = parse_drift_report(read_file_text(*root / "drift.jsonl"), ReportFormat::kJsonl);
  ASSERT_EQ(report.periods.size(), 7u);
  for (int p = 0; p < 7; ++p) {
    EXPECT_EQ(report.periods[p].period_id, "month" + std::to_string(p + 1));
    EXPECT_EQ(report.periods[p].drift_flag, p >= 3) << p;
  }
  EXPECT_FALSE(fs::exists(*root / "drift.jsonl.tmp"));
}

TEST_F(CliTest, ReportsAreByteIdenticalAndCarryConfig) {
  write_file_atomic(*root / "run.cfg", std::string_view("gate.j_alpha = 0.3\nsketch.k = 64\n"));
  auto args = seven_periods();
  args.insert(args.end(), {"--config", path("run.cfg"), "--j-alpha", "0.45", "--seed", "7", "--format", "csv"});
  auto a = args;
  a.insert(a.end(), {"--out", path("a.csv")});
  auto b = args;
  b.insert(b.end(), {"--out", path("b.csv")});
  run(a);
  run(b);
  const std::string ta = read_file_text(*root / "a.csv");
  EXPECT_EQ(ta, read_file_text(*root / "b.csv"));
  EXPECT_NE(ta.find("# gate.j_alpha = " + format_real(0.45) + "\n"), std::string::npos);
  EXPECT_NE(ta.find("# sketch.k = 64\n"), std::string::npos);
  EXPECT_NE(ta.find("# stats.seed = 7\n"), std::string::npos);
}

TEST_F(CliTest, SweepWritesOneRowPerLevel) {
  const CliRun r = run({"sweep", "--baseline", path("base"), "--images", path("month1"), "--noise",
                     "salt-pepper", "--levels", "0,0.1,0.5", "--format", "csv", "--out", path("sweep.csv")});
  ASSERT_EQ(r.code, cli::kExitClean) << r.err;
  const auto report = parse_sensitivity_report(read_file_text(*root / "sweep.csv"), ReportFormat::kCsv);
  EXPECT_EQ(report.kind, NoiseKind::kSaltPepper);
  EXPECT_EQ(report.levels(), (std::vector<double>{0.0, 0.1, 0.5}));
  EXPECT_GT(report.rows[0].cosine, report.rows[2].cosine);
}

TEST_F(CliTest, TrainHeadWritesModelAndCurve) {
  std::vector<FeatureVector> emb;
  std::string labels;
  RandomStream rng = seeded_rng(RandomSeed{3}, "cli-train");
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2;
    const double c = y ? 1.0 : -1.0;
    emb.push_back(FeatureVector{{c + rng.normal(0, 0.2), c + rng.normal(0, 0.2)}, "s" + std::to_string(i)});
    labels += "s" + std::to_string(i) + " " + std::to_string(y) + "\n";
  }
  write_embedding_file(emb, *root / "train.emb");
  write_file_atomic(*root / "train.labels", labels);
  const CliRun r = run({"train-head", "--embeddings", path("train.emb"), "--labels", path("train.labels"),
                     "--out", path("head.dshm"), "--lr", "0.05", "--epochs", "5", "--seed", "1"});
  ASSERT_EQ(r.code, cli::kExitClean) << r.err;
  EXPECT_EQ(load_model(read_file_bytes(*root / "head.dshm")).w.size(), 2u);
  const std::string curve = read_file_text(*root / "head.dshm.curve.csv");
  EXPECT_NE(curve.find("\nepoch,loss\n1,"), std::string::npos);
  EXPECT_NE(curve.find("\n5,"), std::string::npos);
  EXPECT_NE(curve.find("# train.lr = 0.050000000000000003\n"), std::string::npos);

  write_file_atomic(*root / "partial.labels", std::string_view("s0 1\n"));
  EXPECT_EQ(run({"train-head", "--embeddings", path("train.emb"), "--labels", path("partial.labels"),
                 "--out", path("h2.dshm")})
                .code,
            cli::kExitData);
}

TEST_F(CliTest, SplitFromIdsAndImages) {
  write_file_atomic(*root / "ids.txt", std::string_view("a\nb\n# skip\nc\nd\ne\n"));
  ASSERT_EQ(run({"split", "--ids", path("ids.txt"), "--groups", "2", "--seed", "4", "--out", path("s.txt")}).code, 0);
  const SplitPlan plan = parse_split(read_file_text(*root / "s.txt"));
  EXPECT_EQ(plan.assignment.size(), 5u);
  EXPECT_EQ(plan.seed.value, 4u);
  ASSERT_EQ(run({"split", "--images", path("month1"), "--groups", "7", "--out", path("s2.txt")}).code, 0);
  EXPECT_EQ(parse_split(read_file_text(*root / "s2.txt")).assignment.size(), 50u);
  EXPECT_EQ(run({"split", "--ids", path("ids.txt"), "--groups", "9", "--out", path("s3.txt")}).code,
            cli::kExitData);
}

}  // namespace
}  // namespace driftsketch
