// Copyright 2026 The IASSA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iassa/image_io.h"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "iassa/error.h"
#include "iassa/masking.h"

namespace iassa {
namespace {

constexpr std::array<uint8_t, 4> kSmapMagic = {'S', 'M', 'A', 'P'};
constexpr uint32_t kSmapVersion = 1;

void AppendU32Le(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t ReadU32Le(std::span<const uint8_t> bytes, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(bytes[offset + i]) << (8 * i);
  }
  return v;
}

std::string Lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Cursor over a PNM header: whitespace and '#' comments between tokens.
class PnmReader {
 public:
  explicit PnmReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  int NextInt() {
    SkipSpaceAndComments();
    if (pos_ >= bytes_.size()) throw IoError("PNM file is truncated");
    if (!std::isdigit(bytes_[pos_])) {
      throw FormatError("PNM file has a malformed header or sample");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw FormatError("PNM value is too large");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // After maxval exactly one whitespace byte precedes binary samples.
  void SkipSingleWhitespace() {
    if (pos_ >= bytes_.size()) throw IoError("PNM file is truncated");
    ++pos_;
  }

  size_t pos() const { return pos_; }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

ImageTensor DecodePnm(std::span<const uint8_t> bytes) {
  if (bytes.size() < 2) throw IoError("PNM file is truncated");
  const char kind = static_cast<char>(bytes[1]);
  int channels = 0;
  bool binary = false;
  switch (kind) {
    case '2': channels = 1; break;
    case '3': channels = 3; break;
    case '5': channels = 1; binary = true; break;
    case '6': channels = 3; binary = true; break;
    default: throw FormatError("unsupported PNM variant P" + std::string(1, kind));
  }
  PnmReader reader(bytes.subspan(2));
  const int width = reader.NextInt();
  const int height = reader.NextInt();
  const int maxval = reader.NextInt();
  if (width < 1 || height < 1) throw FormatError("PNM has empty dimensions");
  if (maxval < 1 || maxval > 255) {
    throw FormatError("unsupported PNM bit depth (maxval " +
                      std::to_string(maxval) + ")");
  }
  const size_t count = static_cast<size_t>(width) * height * channels;
  std::vector<float> data(count);
  const auto scale = static_cast<float>(maxval);
  if (binary) {
    reader.SkipSingleWhitespace();
    const size_t start = 2 + reader.pos();
    if (bytes.size() < start + count) throw IoError("PNM file is truncated");
    for (size_t i = 0; i < count; ++i) {
      const int v = bytes[start + i];
      if (v > maxval) throw FormatError("PNM sample exceeds maxval");
      data[i] = static_cast<float>(v) / scale;
    }
  } else {
    for (size_t i = 0; i < count; ++i) {
      const int v = reader.NextInt();
      if (v > maxval) throw FormatError("PNM sample exceeds maxval");
      data[i] = static_cast<float>(v) / scale;
    }
  }
  return ImageTensor(height, width, channels, std::move(data));
}

ImageTensor DecodePng(std::span<const uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG: " + message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw FormatError("unsupported PNG bit depth (only 8-bit is supported)");
  }
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = colour ? 3 : 1;
  std::vector<uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG: " + message);
  }
  std::vector<float> data(pixels.size());
  for (size_t i = 0; i < pixels.size(); ++i) data[i] = pixels[i] / 255.0f;
  return ImageTensor(static_cast<int>(image.height),
                     static_cast<int>(image.width), channels, std::move(data));
}

std::vector<uint8_t> ToBytes(const ImageTensor& image) {
  std::vector<uint8_t> out(image.data().size());
  const auto data = image.data();
  for (size_t i = 0; i < data.size(); ++i) {
    out[i] = static_cast<uint8_t>(std::lround(data[i] * 255.0f));
  }
  return out;
}

std::vector<uint8_t> EncodePng(const ImageTensor& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ArgumentError("PNG output needs 1 or 3 channels");
  }
  const std::vector<uint8_t> pixels = ToBytes(image);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0,
                                 nullptr)) {
    throw IoError(std::string("cannot encode PNG: ") + png.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0,
                                 nullptr)) {
    throw IoError(std::string("cannot encode PNG: ") + png.message);
  }
  out.resize(size);
  return out;
}

std::vector<uint8_t> EncodePnm(const ImageTensor& image) {
  const std::string header =
      std::string(image.channels() == 3 ? "P6" : "P5") + "\n" +
      std::to_string(image.width()) + " " + std::to_string(image.height()) +
      "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  const std::vector<uint8_t> pixels = ToBytes(image);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

bool IsPngPath(const std::filesystem::path& path) {
  return Lowercase(path.extension().string()) == ".png";
}

// Piecewise-linear blue -> cyan -> yellow -> red ramp.
const std::array<std::array<uint8_t, 3>, 256>& ColourTable() {
  static const auto table = [] {
    std::array<std::array<uint8_t, 3>, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double v = i / 255.0;
      const auto channel = [v](double centre) {
        const double x = std::clamp(1.5 - std::abs(4.0 * v - centre), 0.0, 1.0);
        return static_cast<uint8_t>(std::lround(255.0 * x));
      };
      t[i] = {channel(3.0), channel(2.0), channel(1.0)};
    }
    return t;
  }();
  return table;
}

}  // namespace

SaliencyFormat ParseSaliencyFormat(std::string_view name) {
  const std::string lower = Lowercase(std::string(name));
  if (lower == "smap") return SaliencyFormat::kSmap;
  if (lower == "csv") return SaliencyFormat::kCsv;
  if (lower == "png" || lower == "png-heatmap") {
    return SaliencyFormat::kPngHeatmap;
  }
  throw ArgumentError("unknown saliency format '" + std::string(name) + "'");
}

std::string_view FileExtension(SaliencyFormat format) {
  switch (format) {
    case SaliencyFormat::kSmap: return ".smap";
    case SaliencyFormat::kCsv: return ".csv";
    case SaliencyFormat::kPngHeatmap: return ".png";
  }
  return "";
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return bytes;
}

void WriteFileAtomically(const std::filesystem::path& path,
                         std::span<const uint8_t> bytes) {
  std::filesystem::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + partial.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("cannot write '" + partial.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(partial, path, ec);
  if (ec) {
    throw IoError("cannot move '" + partial.string() + "' into place: " +
                  ec.message());
  }
}

void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view text) {
  WriteFileAtomically(
      path, std::span<const uint8_t>(
                reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

ImageTensor LoadImage(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' &&
      bytes[2] == 'N' && bytes[3] == 'G') {
    return DecodePng(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') return DecodePnm(bytes);
  if (bytes.empty()) throw IoError("'" + path.string() + "' is empty");
  throw FormatError("'" + path.string() + "' is neither PNM nor PNG");
}

void SaveImage(const ImageTensor& image, const std::filesystem::path& path) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ArgumentError("only 1- and 3-channel images can be saved");
  }
  WriteFileAtomically(path, IsPngPath(path) ? EncodePng(image) : EncodePnm(image));
}

RegionMask LoadRegionMask(const std::filesystem::path& path) {
  const ImageTensor image = LoadImage(path);
  const SaliencyMap mean = ChannelMean(image);
  std::vector<uint8_t> bits(mean.size());
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = mean[i] > 0.5 ? 1 : 0;
  return RegionMask(image.height(), image.width(), std::move(bits));
}

void SaveRegionMask(const RegionMask& mask, const std::filesystem::path& path) {
  std::vector<float> data(mask.bits().size());
  for (size_t i = 0; i < data.size(); ++i) data[i] = mask.bits()[i] ? 1.0f : 0.0f;
  SaveImage(ImageTensor(mask.height(), mask.width(), 1, std::move(data)), path);
}

std::vector<uint8_t> EncodeSmap(const SaliencyMap& s) {
  std::vector<uint8_t> out(kSmapMagic.begin(), kSmapMagic.end());
  out.reserve(16 + 4 * s.size());
  AppendU32Le(out, kSmapVersion);
  AppendU32Le(out, static_cast<uint32_t>(s.height()));
  AppendU32Le(out, static_cast<uint32_t>(s.width()));
  for (double v : s.values()) {
    AppendU32Le(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  return out;
}

SaliencyMap DecodeSmap(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16) throw IoError("SMAP data is truncated");
  if (!std::equal(kSmapMagic.begin(), kSmapMagic.end(), bytes.begin())) {
    throw FormatError("missing SMAP magic");
  }
  const uint32_t version = ReadU32Le(bytes, 4);
  if (version != kSmapVersion) {
    throw FormatError("unsupported SMAP version " + std::to_string(version));
  }
  const uint32_t height = ReadU32Le(bytes, 8);
  const uint32_t width = ReadU32Le(bytes, 12);
  const size_t count = static_cast<size_t>(height) * width;
  if (height == 0 || width == 0) throw FormatError("SMAP has empty dimensions");
  if (bytes.size() != 16 + 4 * count) {
    throw IoError("SMAP payload length does not match its dimensions");
  }
  std::vector<double> values(count);
  for (size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(ReadU32Le(bytes, 16 + 4 * i));
  }
  return SaliencyMap(static_cast<int>(height), static_cast<int>(width),
                     std::move(values));
}

std::string EncodeCsv(const SaliencyMap& s) {
  std::string out;
  char buf[32];
  for (int r = 0; r < s.height(); ++r) {
    for (int c = 0; c < s.width(); ++c) {
      if (c > 0) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), s.at(r, c));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

SaliencyMap DecodeCsv(std::string_view text) {
  std::vector<double> values;
  int rows = 0;
  int width = -1;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    int cols = 0;
    size_t field = 0;
    while (true) {
      size_t comma = line.find(',', field);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view token = line.substr(field, comma - field);
      while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
      while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw FormatError("malformed CSV value '" + std::string(token) + "'");
      }
      values.push_back(v);
      ++cols;
      if (comma == line.size()) break;
      field = comma + 1;
    }
    if (width >= 0 && cols != width) throw FormatError("ragged CSV rows");
    width = cols;
    ++rows;
  }
  if (rows == 0) throw FormatError("empty CSV saliency map");
  return SaliencyMap(rows, width, std::move(values));
}

ImageTensor RenderHeatmap(const SaliencyMap& s) {
  const SaliencyMap norm = MinMaxNormalize(s);
  const auto& table = ColourTable();
  std::vector<float> data(norm.size() * 3);
  for (size_t i = 0; i < norm.size(); ++i) {
    const auto idx = static_cast<size_t>(std::lround(norm[i] * 255.0));
    for (int k = 0; k < 3; ++k) data[3 * i + k] = table[idx][k] / 255.0f;
  }
  return ImageTensor(s.height(), s.width(), 3, std::move(data));
}

void SaveSaliency(const SaliencyMap& s, const std::filesystem::path& path,
                  SaliencyFormat format) {
  switch (format) {
    case SaliencyFormat::kSmap:
      WriteFileAtomically(path, EncodeSmap(s));
      return;
    case SaliencyFormat::kCsv:
      WriteFileAtomically(path, EncodeCsv(s));
      return;
    case SaliencyFormat::kPngHeatmap:
      WriteFileAtomically(path, EncodePng(RenderHeatmap(s)));
      return;
  }
}

SaliencyMap LoadSaliency(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() >= 4 &&
      std::equal(kSmapMagic.begin(), kSmapMagic.end(), bytes.begin())) {
    return DecodeSmap(bytes);
  }
  return DecodeCsv(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                    bytes.size()));
}

}  // namespace iassa
