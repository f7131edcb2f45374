// Copyright 2026 The roiqa Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

using Bytes = std::vector<std::uint8_t>;

/// 8-bit RGB PNG. Samples are quantized with round(v * 255).
Bytes encode_png(const ImageBuffer& image);
ImageBuffer decode_png(std::span<const std::uint8_t> bytes);

/// 1-channel 8-bit PNG, 255 inside and 0 outside.
Bytes encode_mask_png(const RegionMask& mask);
/// Any PNG; a pixel is inside when its gray value is nonzero.
RegionMask decode_mask_png(std::span<const std::uint8_t> bytes);

bool looks_like_png(std::span<const std::uint8_t> bytes);

ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

Bytes read_bytes(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of the bytes; used as the image_id of a reference file.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

/// Rounds every sample to the nearest 8-bit level, exactly what a PNG round-trip yields.
ImageBuffer quantize_8bit(const ImageBuffer& image);

}  // namespace roiqa
