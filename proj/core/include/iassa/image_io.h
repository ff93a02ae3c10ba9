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

#ifndef IASSA_IMAGE_IO_H_
#define IASSA_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iassa/grid.h"

namespace iassa {

class RegionMask;

enum class SaliencyFormat { kSmap, kCsv, kPngHeatmap };

// Parses "smap", "csv" or "png"/"png-heatmap".
SaliencyFormat ParseSaliencyFormat(std::string_view name);
std::string_view FileExtension(SaliencyFormat format);

// Reads PGM/PPM (P2, P3, P5, P6; maxval <= 255) or 8-bit PNG. Grey stays one
// channel, colour stays three; PNG alpha is dropped and palettes expanded.
// Throws IoError when the file cannot be read or is truncated, FormatError
// for unsupported encodings or bit depths.
ImageTensor LoadImage(const std::filesystem::path& path);

// Writes binary PGM/PPM, or PNG when the extension is ".png".
void SaveImage(const ImageTensor& image, const std::filesystem::path& path);

// Binary masks are any image; a pixel is set when its channel mean > 0.5.
RegionMask LoadRegionMask(const std::filesystem::path& path);
void SaveRegionMask(const RegionMask& mask, const std::filesystem::path& path);

// SMAP layout: "SMAP", u32 version = 1, u32 height, u32 width, then
// height * width little-endian IEEE-754 binary32 values, row-major.
// Values are stored as float, so a write/read round trip is exact for maps
// whose values are representable in binary32.
std::vector<uint8_t> EncodeSmap(const SaliencyMap& s);
SaliencyMap DecodeSmap(std::span<const uint8_t> bytes);

// One line per grid row, comma-separated shortest round-trip decimals.
std::string EncodeCsv(const SaliencyMap& s);
SaliencyMap DecodeCsv(std::string_view text);

// Normalizes the map and paints it through a fixed 256-entry colour table.
ImageTensor RenderHeatmap(const SaliencyMap& s);

void SaveSaliency(const SaliencyMap& s, const std::filesystem::path& path,
                  SaliencyFormat format);
// Detects SMAP by its magic and falls back to CSV otherwise.
SaliencyMap LoadSaliency(const std::filesystem::path& path);

// Writes `bytes` to "<path>.partial" and renames it into place, so readers
// never see a half-written file under the final name.
void WriteFileAtomically(const std::filesystem::path& path,
                         std::span<const uint8_t> bytes);
void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view text);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);

}  // namespace iassa

#endif  // IASSA_IMAGE_IO_H_
