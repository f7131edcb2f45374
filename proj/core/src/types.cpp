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

#include "roiqa/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace roiqa {

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width * kChannels, fill) {}

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_ * kChannels) {
    throw Error("ImageBuffer: data length does not match " + std::to_string(height) + "x" +
                std::to_string(width) + "x3");
  }
}

void ImageBuffer::clamp() {
  for (double& v : data_) {
    v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  }
}

RegionMask::RegionMask(std::size_t height, std::size_t width, bool fill)
    : height_(height), width_(width), bits_(height * width, fill ? 1 : 0) {}

RegionMask::RegionMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (bits_.size() != height_ * width_) {
    throw Error("RegionMask: bit count does not match dimensions");
  }
  for (auto& b : bits_) {
    b = b != 0 ? 1 : 0;
  }
}

std::size_t RegionMask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

constexpr std::array<std::string_view, kDistortionTypeCount> kTypeNames = {
    "exposure", "noise", "blur", "contrast", "colorfulness", "compression"};

constexpr std::array<std::string_view, kLevelCount> kQualityNames = {"Bad", "Poor", "Fair", "Good",
                                                                     "Excellent"};
constexpr std::array<std::string_view, kLevelCount> kImportanceNames = {
    "Unimportant", "Minor", "Normal", "Important", "Essential"};
constexpr std::array<std::string_view, kLevelCount> kSeverityNames = {
    "Extreme", "Severe", "Moderate", "Minor", "Trivial"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(DistortionType type) { return kTypeNames.at(index_of(type)); }

DistortionType parse_distortion_type(std::string_view name) {
  const std::string key = lower(name);
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == key) return static_cast<DistortionType>(i);
  }
  throw Error("unknown distortion type '" + std::string(name) + "'");
}

const std::array<std::string_view, kLevelCount>& LevelScale::categories() const {
  switch (kind) {
    case ScaleKind::Quality:
      return kQualityNames;
    case ScaleKind::Importance:
      return kImportanceNames;
    case ScaleKind::Severity:
      return kSeverityNames;
  }
  return kQualityNames;
}

Score Score::to_human() const {
  if (scale == ScoreScale::Human) return *this;
  return {value * kHumanScaleMax, ScoreScale::Human};
}

Score Score::to_oracle() const {
  if (scale == ScoreScale::Oracle) return *this;
  return {value / kHumanScaleMax, ScoreScale::Oracle};
}

std::string_view to_string(ScoreScale scale) {
  return scale == ScoreScale::Oracle ? "oracle" : "human";
}

ScoreScale parse_score_scale(std::string_view name) {
  if (name == "oracle") return ScoreScale::Oracle;
  if (name == "human") return ScoreScale::Human;
  throw Error("unknown score scale '" + std::string(name) + "'");
}

std::string_view to_string(LabelSource source) {
  return source == LabelSource::SyntheticOracle ? "synthetic-oracle" : "human-aggregated";
}

LabelSource parse_label_source(std::string_view name) {
  if (name == "synthetic-oracle") return LabelSource::SyntheticOracle;
  if (name == "human-aggregated") return LabelSource::HumanAggregated;
  throw Error("unknown label source '" + std::string(name) + "'");
}

std::string_view to_string(MaskLevel level) {
  return level == MaskLevel::Component ? "component" : "object";
}

MaskLevel parse_mask_level(std::string_view name) {
  if (name == "component") return MaskLevel::Component;
  if (name == "object") return MaskLevel::Object;
  throw Error("unknown mask level '" + std::string(name) + "'");
}

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw Error("unknown split '" + std::string(name) + "'");
}

void RoiLabelRecord::validate() const {
  const auto check_score = [](const Score& s, const char* what) {
    if (!std::isfinite(s.value) || s.value < 0.0 || s.value > s.max_value()) {
      throw Error(std::string(what) + " outside its declared scale");
    }
  };
  check_score(quality_score, "quality_score");
  check_score(importance_score, "importance_score");
  for (const auto& d : distortions) {
    if (d.present != d.severity.has_value()) {
      throw Error("distortion '" + std::string(to_string(d.type)) +
                  "': severity must be set iff present");
    }
    if (d.severity && (*d.severity < 0.0 || *d.severity > kHumanScaleMax)) {
      throw Error("distortion severity outside [0,4]");
    }
  }
}

}  // namespace roiqa
