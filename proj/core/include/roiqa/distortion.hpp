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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

inline constexpr std::size_t kLevelsPerFamily = 20;

using ParamGrid = std::array<double, kLevelsPerFamily>;

/// The fixed 20-level parameter grid of a family, ordered mildest first.
///
/// Noise sigma and blur sigma increase along the grid; the compression
/// quality factor decreases. Exposure, contrast and colorfulness deviate on
/// both sides of identity: even levels take the lower side, odd levels the
/// upper side, and the deviation from identity grows with the level index on
/// each side (normalized position level/19 along that side's range).
const ParamGrid& param_grid(DistortionType type);

/// Position of `level` along its side of the grid, level/19, in [0,1].
double normalized_severity(std::size_t level);

struct DistortionSpec {
  DistortionType type = DistortionType::Noise;
  std::size_t level_index = 0;
  double parameter = 0.0;
  std::uint64_t seed = 0;

  /// Spec for a grid level; `parameter` is filled from the grid.
  static DistortionSpec at_level(DistortionType type, std::size_t level, std::uint64_t seed);
};

/// Applies the family to any parameter value, on-grid or not. `noise_key`
/// keys the counter-based generator and is only read by the Noise family.
ImageBuffer apply_family(const ImageBuffer& image, DistortionType type, double parameter,
                         std::uint64_t noise_key = 0);

/// Checks that `spec.parameter` is the grid value at `spec.level_index`,
/// derives the noise key from (seed, image_id, type) and applies
/// the family.
ImageBuffer apply_distortion(const ImageBuffer& image, const DistortionSpec& spec,
                             std::string_view image_id = {});

/// One noise field per (seed, image, family), shared by every level so that
/// stronger levels only scale the same field.
std::uint64_t noise_key(std::uint64_t seed, std::string_view image_id, DistortionType type);

// Individual families, exposed for tests and benchmarks.
ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma);
ImageBuffer jpeg_like_compress(const ImageBuffer& image, double quality_factor);

/// Standard JPEG luminance table scaled by the IJG quality rule.
std::array<double, 64> scaled_quant_table(double quality_factor);

struct SynthOptions {
  std::vector<DistortionType> families;
  std::vector<std::size_t> levels;  // empty = all 20
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Writes one 8-bit PNG per (reference, family, level) plus `manifest.jsonl`
/// under `out_dir`; reference copies go to `out_dir/ref`, distorted images to
/// `out_dir/dist`. Paths in the manifest are relative to `out_dir`.
DatasetManifest synth_dataset(const std::filesystem::path& ref_dir,
                              const std::filesystem::path& out_dir, const SynthOptions& options);

}  // namespace roiqa
