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
#include <cctype>
#include <cmath>

#include "driftsketch/store.hpp"

namespace driftsketch {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      if (value > 100'000'000) throw Error(ErrorCode::kCorruptHeader, std::string(what) + " too large");
      value = value * 10 + (bytes_[pos_] - '0');
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorCode::kCorruptHeader, std::string("missing ") + what);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::kCorruptHeader, "no whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

ImageGrid decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorCode::kUnsupportedFormat, "expected binary PGM (P5) or PPM (P6)");
  }
  HeaderReader header(bytes);
  ImageGrid img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  img.width = header.number("width");
  img.height = header.number("height");
  const std::size_t maxval = header.number("maxval");
  header.end_of_header();
  if (img.width == 0 || img.height == 0) throw Error(ErrorCode::kCorruptHeader, "zero dimension");
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "only 8-bit maxval 255 is supported, got " + std::to_string(maxval));
  }
  const std::size_t need = img.expected_size();
  const std::size_t have = bytes.size() - header.pos();
  if (have < need) {
    throw Error(ErrorCode::kTruncatedData,
                "need " + std::to_string(need) + " bytes, have " + std::to_string(have));
  }
  img.pixels.resize(need);
  for (std::size_t i = 0; i < need; ++i) {
    img.pixels[i] = static_cast<double>(bytes[header.pos() + i]) / 255.0;
  }
  return img;
}

ImageGrid load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_pnm(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> encode_pnm(const ImageGrid& img) {
  require_valid_image(img);
  const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width) + " " + std::to_string(img.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.pixels.size());
  for (double p : img.pixels) {
    out.push_back(static_cast<std::uint8_t>(std::lround(p * 255.0)));
  }
  return out;
}

void save_image(const ImageGrid& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pnm(img));
}

ImageSet load_image_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  ImageSet set;
  for (const auto& f : files) {
    set.ids.push_back(f.stem().string());
    set.images.push_back(load_image(f));
  }
  return set;
}

}  // namespace driftsketch
