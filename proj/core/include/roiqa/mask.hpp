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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

/// Run-length wire form of a RegionMask. Runs are row-major and alternate
/// starting with a run of zeros (which may be empty).
struct RleMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint64_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask encode_rle(const RegionMask& mask);
RegionMask decode_rle(const RleMask& rle);

/// `{"size":[H,W],"counts":[...]}`
std::string rle_to_json(const RleMask& rle);
RleMask parse_rle_json(std::string_view text);

/// Decodes JSON RLE or a 1-channel PNG (nonzero = inside). When `expected`
/// dimensions are given, a mismatch is an error.
struct MaskDims {
  std::size_t height;
  std::size_t width;
};
RegionMask decode_mask(std::span<const std::uint8_t> bytes,
                       std::optional<MaskDims> expected = std::nullopt);

inline constexpr std::size_t kMinRoiArea = 32 * 32;
inline constexpr double kProposalColorThreshold = 0.08;
inline constexpr double kProposalAreaCap = 0.25;

/// Seeded region growing: grow the 4-connected region of pixels whose RGB
/// distance to the running region mean is at most 0.08, stopping at 25% of
/// the image area. Proposals are disjoint and pass filter_small.
std::vector<RegionMask> propose_masks(const ImageBuffer& image, std::size_t n, std::uint64_t seed);

/// Keeps masks with at least 32x32 = 1024 pixels.
std::vector<RegionMask> filter_small(std::vector<RegionMask> masks);

struct CroppedRoi {
  ImageBuffer patch;      // tight bounding box, background zeroed
  RegionMask inner_mask;  // aligned to patch
  std::size_t row_offset = 0;
  std::size_t col_offset = 0;
};

CroppedRoi crop_to_min_rect(const ImageBuffer& image, const RegionMask& mask);

/// Writes the masked pixels of `roi` back into `target` at the recorded offset.
void embed_roi(const CroppedRoi& roi, ImageBuffer& target);

/// Fraction of each cell of an h x w grid covered by the mask, computed from
/// the cell's exact footprint on the mask grid. Row-major, length h*w.
std::vector<double> coverage_fractions(const RegionMask& mask, std::size_t h, std::size_t w);

/// Coverage-weighted mean of a C x h x w feature map (channel-major).
std::vector<double> mask_pool(std::span<const double> featmap, std::size_t channels,
                              std::size_t h, std::size_t w, const RegionMask& mask);

}  // namespace roiqa
