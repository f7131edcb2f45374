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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roiqa {

/// Thrown for malformed inputs and violated preconditions across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H x W x 3 RGB image, row-major with interleaved channels, values in [0,1].
class ImageBuffer {
 public:
  static constexpr std::size_t kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(std::size_t height, std::size_t width, double fill = 0.0);
  ImageBuffer(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return kChannels; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return height_ == 0 || width_ == 0; }

  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[(row * width_ + col) * kChannels + ch];
  }
  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data_[(row * width_ + col) * kChannels + ch];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Clamps every sample to [0,1]; NaN becomes 0.
  void clamp();

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Binary inclusion mask over an image grid, row-major.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(std::size_t height, std::size_t width, bool fill = false);
  RegionMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  bool at(std::size_t row, std::size_t col) const { return bits_[row * width_ + col] != 0; }
  void set(std::size_t row, std::size_t col, bool value) {
    bits_[row * width_ + col] = value ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::size_t popcount() const noexcept;

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class DistortionType : int {
  Exposure = 0,
  Noise = 1,
  Blur = 2,
  Contrast = 3,
  Colorfulness = 4,
  Compression = 5,
};

inline constexpr std::size_t kDistortionTypeCount = 6;
inline constexpr std::array<DistortionType, kDistortionTypeCount> kAllDistortionTypes = {
    DistortionType::Exposure, DistortionType::Noise,        DistortionType::Blur,
    DistortionType::Contrast, DistortionType::Colorfulness, DistortionType::Compression};

/// Lower-case wire name ("exposure", "noise", ...).
std::string_view to_string(DistortionType type);
DistortionType parse_distortion_type(std::string_view name);
inline std::size_t index_of(DistortionType type) { return static_cast<std::size_t>(type); }

enum class ScaleKind { Quality, Importance, Severity };

inline constexpr std::size_t kLevelCount = 5;

/// Five-level categorical scale with score-range maximum M.
struct LevelScale {
  ScaleKind kind = ScaleKind::Quality;
  double max_value = 4.0;

  static LevelScale quality(double max_value) { return {ScaleKind::Quality, max_value}; }
  static LevelScale importance(double max_value) { return {ScaleKind::Importance, max_value}; }
  static LevelScale severity(double max_value) { return {ScaleKind::Severity, max_value}; }

  const std::array<std::string_view, kLevelCount>& categories() const;
};

/// Which range a score lives on. Oracle scores are in [0,1], human scores in [0,4].
enum class ScoreScale { Oracle, Human };

inline constexpr double kHumanScaleMax = 4.0;

struct Score {
  double value = 0.0;
  ScoreScale scale = ScoreScale::Oracle;

  double max_value() const { return scale == ScoreScale::Oracle ? 1.0 : kHumanScaleMax; }
  /// Explicit conversions; the only way scores change scale.
  Score to_human() const;
  Score to_oracle() const;

  friend bool operator==(const Score&, const Score&) = default;
};

std::string_view to_string(ScoreScale scale);
ScoreScale parse_score_scale(std::string_view name);

struct DistortionLabel {
  DistortionType type = DistortionType::Exposure;
  bool present = false;
  std::optional<double> severity;  // [0,4]; set iff present

  friend bool operator==(const DistortionLabel&, const DistortionLabel&) = default;
};

enum class LabelSource { SyntheticOracle, HumanAggregated };

std::string_view to_string(LabelSource source);
LabelSource parse_label_source(std::string_view name);

enum class MaskLevel { Component, Object };

std::string_view to_string(MaskLevel level);
MaskLevel parse_mask_level(std::string_view name);

struct RoiLabelRecord {
  std::string roi_id;
  std::string image_id;
  std::string mask;
  Score quality_score;
  Score importance_score;
  std::vector<DistortionLabel> distortions;
  LabelSource source = LabelSource::SyntheticOracle;
  MaskLevel mask_level = MaskLevel::Component;

  /// Throws Error when a score leaves its scale or severity/presence disagree.
  void validate() const;

  friend bool operator==(const RoiLabelRecord&, const RoiLabelRecord&) = default;
};

enum class Split { Train, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string image_id;
  std::string reference_path;
  std::string distorted_path;
  DistortionType distortion_type = DistortionType::Noise;
  int parameter_index = 0;
  double parameter_value = 0.0;
  std::vector<std::string> roi_ids;
  std::optional<Split> split;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> records;
};

}  // namespace roiqa
