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

#include <string_view>

#include "roiqa/types.hpp"

namespace roiqa {

// Full-reference fidelity oracle.
//
// At three dyadic scales (2x2 box downsampling between scales) the luma plane
// is compared in 8x8 windows at stride 4 with the usual luminance, contrast
// and structure statistics:
//
//   ssim_w = (2 mx my + C1)(2 sxy + C2) / ((mx^2 + my^2 + C1)(sx^2 + sy^2 + C2))
//
// with C1 = 0.01^2 and C2 = 0.03^2. The per-scale index is the window mean
// clamped to [0,1], multiplied by a chroma factor 1 / (1 + 4 d) where d is the
// mean Euclidean (Cb, Cr) difference at that scale. The score is the geometric
// mean over the scales whose shorter side still holds one window.
struct FrOracleConstants {
  static constexpr double kC1 = 0.01 * 0.01;
  static constexpr double kC2 = 0.03 * 0.03;
  static constexpr double kChromaWeight = 4.0;
  static constexpr std::size_t kWindow = 8;
  static constexpr std::size_t kStride = 4;
  static constexpr std::size_t kScales = 3;
};

/// Fidelity of `dist` against `ref`, in [0,1]; exactly 1 for identical inputs.
double fr_score(const ImageBuffer& dist, const ImageBuffer& ref);

/// fr_score of the two minimum-rectangle crops (background zeroed in both).
double roi_quality_score(const ImageBuffer& dist, const ImageBuffer& ref, const RegionMask& mask);

/// 1 - fr_score(replaced, ref) where `replaced` is `ref` with the masked
/// pixels taken from `dist`.
double roi_importance_score(const ImageBuffer& dist, const ImageBuffer& ref,
                            const RegionMask& mask);

inline constexpr double kCleanThreshold = 0.92;

struct PresenceLabel {
  bool present = false;
  DistortionType type = DistortionType::Noise;
};

/// Absent iff quality is strictly above the threshold.
PresenceLabel distortion_label(double quality, DistortionType applied,
                               double threshold = kCleanThreshold);

struct Level {
  std::size_t index = 0;
  std::string_view name;
};

/// Five-bin discretization: index i with M*i/5 < s <= M*(i+1)/5; s = 0 maps to 0.
Level discretize(double score, const LevelScale& scale);

}  // namespace roiqa
