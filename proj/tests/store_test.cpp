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

#include "driftsketch/store.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <set>

#include <unistd.h>

#include "support/synth.hpp"

namespace driftsketch {
namespace {

namespace fs = std::filesystem;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoError;
}

std::vector<std::uint8_t> bytes_of(std::string_view s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("driftsketch_store_" + std::to_string(::getpid()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

SketchLibrary sample_library() {
  const std::vector<FeatureVector> f = {{{0.1, 0.2, 0.3}, "a"}, {{0.4, 0.5, 0.6}, "b"}};
  SketchConfig s;
  s.k = 8;
  s.hash_seed = RandomSeed{3};
  QuantConfig q;
  q.clamp_lo = -1.0;
  q.clamp_hi = 1.0;
  return build_library(f, q, s, 0xABCDEFULL);
}

DriftReport sample_drift() {
  return DriftReport{"base",
                     {PeriodStats{"p1", 10, 0.1, 0.9, 0.99, 0, false},
                      PeriodStats{"p2", 12, 0.4, 1e-5, 0.95, 3, true},
                      PeriodStats{"p3", 11, 1.0 / 3.0, 0.0123456789012345678, 0.97, 1, true}}};
}

TEST(PnmTest, DecodesGrayAndColor) {
  const auto gray = decode_pnm(bytes_of(std::string("P5\n# c\n2 1\n255\n") + '\x00' + '\xff'));
  EXPECT_EQ(gray.width, 2u);
  EXPECT_EQ(gray.height, 1u);
  EXPECT_EQ(gray.channels, 1u);
  EXPECT_EQ(gray.pixels, (std::vector<double>{0.0, 1.0}));
  const auto color = decode_pnm(bytes_of(std::string("P6 1 1 255\n") + "\x33\x66\x99"));
  EXPECT_EQ(color.channels, 3u);
  EXPECT_DOUBLE_EQ(color.pixels[0], 0.2);
  EXPECT_DOUBLE_EQ(color.pixels[1], 0.4);
  EXPECT_DOUBLE_EQ(color.pixels[2], 0.6);
}

TEST(PnmTest, Errors) {
  EXPECT_EQ(code_of([] { decode_pnm(bytes_of("P2\n1 1\n255\n0")); }), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(code_of([] { decode_pnm(bytes_of("P5\n1 1\n65535\n00")); }), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(code_of([] { decode_pnm(bytes_of("P5\nx 1\n255\n0")); }), ErrorCode::kCorruptHeader);
  EXPECT_EQ(code_of([] { decode_pnm(bytes_of("P5\n0 1\n255\n")); }), ErrorCode::kCorruptHeader);
  EXPECT_EQ(code_of([] { decode_pnm(bytes_of("P5\n3 1\n255\n00")); }), ErrorCode::kTruncatedData);
  EXPECT_EQ(code_of([] { decode_pnm({}); }), ErrorCode::kUnsupportedFormat);
}

TEST(PnmTest, RoundTripsEightBitValues) {
  const ImageGrid img = testing::StructuredImageGenerator{}.make(RandomSeed{1});
  const ImageGrid back = decode_pnm(encode_pnm(img));
  ASSERT_EQ(back.pixels.size(), img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    EXPECT_LE(std::abs(back.pixels[i] - img.pixels[i]), 0.5 / 255.0 + 1e-12);
  }
  EXPECT_EQ(decode_pnm(encode_pnm(back)), back);
}

TEST_F(TempDir, ImageDirectoryIsSortedByName) {
  save_image(testing::constant_image(3, 3, 0.2), dir / "b.pgm");
  save_image(testing::constant_image(3, 3, 0.4), dir / "a.pgm");
  save_image(testing::constant_image(2, 2, 0.4, 3), dir / "c.ppm");
  write_file_atomic(dir / "notes.txt", std::string_view("ignored"));
  const ImageSet set = load_image_dir(dir);
  EXPECT_EQ(set.ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(set.images[2].channels, 3u);
  EXPECT_EQ(code_of([&] { load_image_dir(dir / "missing"); }), ErrorCode::kIoError);
  EXPECT_FALSE(fs::exists(dir / "a.pgm.tmp"));
}

TEST(EmbeddingTextTest, RoundTrip) {
  const std::vector<FeatureVector> v = {{{0.1, -2.5e-7}, "x"}, {{1.0 / 3.0, 7.0}, "y"}};
  EXPECT_EQ(parse_embeddings(format_embeddings(v)), v);
  const std::string with_config = format_embeddings(v, {{"sketch.k", "128"}});
  EXPECT_NE(with_config.find("\n# sketch.k = 128\n"), std::string::npos);
  EXPECT_EQ(parse_embeddings(with_config), v);
  const std::vector<FeatureVector> hash_id = {{{0.1}, "#x"}};
  EXPECT_THROW(format_embeddings(hash_id), Error);
}

TEST(LabelsTest, ParsesAndRejects) {
  const auto labels = parse_labels("a 1\n# comment\nb 0  # trailing\n\n");
  EXPECT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels.at("a"), 1);
  EXPECT_EQ(labels.at("b"), 0);
  EXPECT_EQ(code_of([] { parse_labels("a 2\n"); }), ErrorCode::kMalformedFile);
  EXPECT_EQ(code_of([] { parse_labels("a 1\na 0\n"); }), ErrorCode::kDuplicateSourceId);
}

TEST(LibraryBinaryTest, RoundTrip) {
  const SketchLibrary lib = sample_library();
  const auto bytes = save_library(lib);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DSKL");
  EXPECT_EQ(load_library(bytes), lib);
  EXPECT_EQ(save_library(load_library(bytes)), bytes);
}

TEST(LibraryBinaryTest, EverySingleBitFlipIsDetected) {
  const auto bytes = save_library(sample_library());
  const std::set<ErrorCode> expected = {ErrorCode::kBadMagic, ErrorCode::kVersionUnsupported,
                                        ErrorCode::kTruncatedData, ErrorCode::kChecksumMismatch};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bad = bytes;
      bad[i] ^= static_cast<std::uint8_t>(1u << bit);
      const ErrorCode c = code_of([&] { load_library(bad); });
      ASSERT_TRUE(expected.count(c)) << "byte " << i << " bit " << bit << " -> " << to_string(c);
    }
  }
}

TEST(LibraryBinaryTest, StructuralErrors) {
  const auto bytes = save_library(sample_library());
  EXPECT_EQ(code_of([] { load_library({}); }), ErrorCode::kBadMagic);
  EXPECT_EQ(code_of([&] { load_library(std::span(bytes).first(bytes.size() - 1)); }),
            ErrorCode::kTruncatedData);
  EXPECT_EQ(code_of([&] { load_library(std::span(bytes).first(8)); }), ErrorCode::kTruncatedData);
  auto v2 = bytes;
  v2[4] = 2;
  EXPECT_EQ(code_of([&] { load_library(v2); }), ErrorCode::kVersionUnsupported);
  EXPECT_EQ(code_of([&] { load_library(save_model(HeadModel{{1.0}, 0.0})); }), ErrorCode::kBadMagic);
}

TEST(ModelBinaryTest, RoundTripAndFlips) {
  const HeadModel m{{0.25, -1.0 / 3.0, 1e-300}, -0.75};
  const auto bytes = save_model(m);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DSHM");
  const HeadModel back = load_model(bytes);
  EXPECT_EQ(back.w, m.w);
  EXPECT_EQ(back.b, m.b);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bad = bytes;
      bad[i] ^= static_cast<std::uint8_t>(1u << bit);
      EXPECT_THROW(load_model(bad), Error);
    }
  }
}

TEST(ReportTest, CsvHasHeaderAndOneRowPerPeriod) {
  const std::string csv = format_report(sample_drift(), ReportFormat::kCsv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "baseline_id,period_id,n_images,ks_D,ks_p,cosine_score,gate_flag_count,drift_flag");
}

TEST(ReportTest, RoundTripsBothFormats) {
  const KeyValues cfg = to_key_values(PipelineConfig{});
  for (ReportFormat f : {ReportFormat::kJsonl, ReportFormat::kCsv}) {
    EXPECT_EQ(parse_drift_report(format_report(sample_drift(), f, cfg), f), sample_drift());
    EXPECT_EQ(parse_drift_report(format_report(sample_drift(), f), f), sample_drift());
  }
  const SensitivityReport s{NoiseKind::kSaltPepper,
                            {SensitivityRow{0.0, 1.0, 0.0, 1.0, 0.0},
                             SensitivityRow{0.1, 0.97, 0.2, 1e-9, 0.25}}};
  for (ReportFormat f : {ReportFormat::kJsonl, ReportFormat::kCsv}) {
    EXPECT_EQ(parse_sensitivity_report(format_report(s, f, cfg), f), s);
  }
}

TEST(ReportTest, EmbedsConfig) {
  const KeyValues cfg = to_key_values(PipelineConfig{});
  const std::string jsonl = format_report(sample_drift(), ReportFormat::kJsonl, cfg);
  EXPECT_EQ(jsonl.rfind("{\"record\":\"config\"", 0), 0u);
  EXPECT_NE(jsonl.find("\"gate.j_alpha\":\"0.5\""), std::string::npos);
  const std::string csv = format_report(sample_drift(), ReportFormat::kCsv, cfg);
  EXPECT_EQ(csv.rfind("# schema_version = 1\n", 0), 0u);
}

TEST(ReportTest, RejectsMalformed) {
  EXPECT_EQ(code_of([] { parse_drift_report("not json\n", ReportFormat::kJsonl); }),
            ErrorCode::kMalformedFile);
  EXPECT_EQ(code_of([] { parse_drift_report("a,b\n", ReportFormat::kCsv); }),
            ErrorCode::kMalformedFile);
  EXPECT_EQ(code_of([] { parse_report_format("xml"); }), ErrorCode::kConfigInvalid);
}

TEST_F(TempDir, WriteReportValidatesFirst) {
  DriftReport bad = sample_drift();
  bad.periods[0].drift_flag = true;  // p = 0.9 is not below 0.05
  const fs::path out = dir / "r.jsonl";
  EXPECT_EQ(code_of([&] { write_report(bad, ReportFormat::kJsonl, out, 0.05); }),
            ErrorCode::kInvalidReport);
  EXPECT_FALSE(fs::exists(out));
  write_report(sample_drift(), ReportFormat::kJsonl, out, 0.05);
  EXPECT_EQ(parse_drift_report(read_file_text(out), ReportFormat::kJsonl), sample_drift());
}

TEST(SplitTest, BalancedGroups) {
  const auto ids = testing::numbered_ids("img", 23);
  const SplitPlan plan = split_dataset(ids, 7, RandomSeed{5});
  std::vector<std::size_t> sizes;
  std::set<std::string> seen;
  for (const auto& g : plan.groups()) {
    sizes.push_back(g.size());
    seen.insert(g.begin(), g.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 3, 3, 3, 3, 3}));
  EXPECT_EQ(seen.size(), 23u);
  EXPECT_EQ(split_dataset(ids, 7, RandomSeed{5}), plan);
  EXPECT_NE(split_dataset(ids, 7, RandomSeed{6}), plan);
  EXPECT_EQ(parse_split(format_split(plan)), plan);
}

TEST(SplitTest, Errors) {
  const auto ids = testing::numbered_ids("img", 3);
  EXPECT_EQ(code_of([&] { split_dataset(ids, 1, RandomSeed{}); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(code_of([&] { split_dataset(ids, 4, RandomSeed{}); }), ErrorCode::kTooFewIds);
  const std::vector<std::string> dup = {"a", "b", "a"};
  EXPECT_EQ(code_of([&] { split_dataset(dup, 2, RandomSeed{}); }), ErrorCode::kDuplicateIds);
  EXPECT_EQ(code_of([] { parse_split("driftsketch-split v1 groups=2 seed=0\na 5\n"); }),
            ErrorCode::kMalformedFile);
}

}  // namespace
}  // namespace driftsketch
