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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

inline constexpr std::size_t kFinalizeRaters = 7;
inline constexpr int kNonExistentRating = 5;

/// Rejected input; maps to HTTP 400.
class ValidationError : public Error {
 public:
  using Error::Error;
};
/// Unknown ROI or annotator; maps to HTTP 404.
class NotFoundError : public Error {
 public:
  using Error::Error;
};
/// Submission to a finalized ROI; maps to HTTP 409.
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// One annotator's ratings of one ROI. Distortion ratings are 0 (extreme)
/// to 4 (trivial), or 5 for non-existent; quality and importance are 0..4.
struct RatingRecord {
  std::string roi_id;
  std::string annotator_id;
  std::array<int, kDistortionTypeCount> distortions{};
  int quality = 0;
  int importance = 0;
  std::string timestamp;

  /// Throws ValidationError.
  void validate() const;
  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

std::string rating_to_json(const RatingRecord& record);
/// Strict parse: integer fields only, all six distortion types required,
/// unknown keys rejected. Throws ValidationError.
RatingRecord parse_rating(std::string_view text);

struct DistortionAggregate {
  DistortionType type = DistortionType::Exposure;
  std::size_t nonexistent_votes = 0;
  bool present = false;
  std::optional<double> mean_severity;       // over ratings below 5
  std::optional<std::size_t> severity_level;  // discretized with M = 4

  friend bool operator==(const DistortionAggregate&, const DistortionAggregate&) = default;
};

struct AggregatedLabel {
  std::string roi_id;
  std::size_t rater_count = 0;
  std::array<DistortionAggregate, kDistortionTypeCount> distortions{};
  double quality_mean = 0.0;
  std::size_t quality_level = 0;
  double importance_mean = 0.0;
  std::size_t importance_level = 0;
  bool finalized = false;

  friend bool operator==(const AggregatedLabel&, const AggregatedLabel&) = default;
};

/// A distortion is absent iff strictly more than half of the raters chose
/// 5; a present distortion's severity is the mean of the ratings below 5.
/// Quality and importance are plain means. finalized = at least 7 raters.
/// Throws Error on an empty list, mixed ROI ids or a repeated annotator.
AggregatedLabel aggregate_roi(std::span<const RatingRecord> ratings);

/// As aggregate_roi, but throws Error below 7 raters.
AggregatedLabel finalize_roi(std::span<const RatingRecord> ratings);

std::string aggregated_to_json(const AggregatedLabel& label);

/// Human-aggregated label record for a finalized ROI.
RoiLabelRecord to_label_record(const AggregatedLabel& label, const std::string& image_id,
                               const std::string& mask_path, MaskLevel mask_level);

/// An ROI open for annotation.
struct RoiInfo {
  std::string roi_id;
  std::string image_id;
  std::filesystem::path image_path;  // file served to annotators
  std::string mask_path;             // as stored in label records, relative to dataset_dir
  std::filesystem::path dataset_dir;
  MaskLevel mask_level = MaskLevel::Component;
};

/// ROIs of every manifest entry, in manifest order.
std::vector<RoiInfo> rois_from_manifest(const DatasetManifest& manifest,
                                        const std::filesystem::path& dataset_dir);

struct RoiProgress {
  std::string roi_id;
  std::size_t rater_count = 0;
  bool finalized = false;
};

/// Ratings keyed by ROI and annotator, persisted as an append-only JSON-lines
/// event log. The constructor replays an existing log. Thread-safe: writers
/// are serialized, readers share a lock.
class AnnotationStore {
 public:
  AnnotationStore(std::vector<RoiInfo> rois, std::vector<std::string> annotators,
                  std::filesystem::path log_path);

  /// Unrated, unfinalized ROI with the most ratings (ties in ROI order), or
  /// nullopt when none is left. Throws NotFoundError for unknown annotators.
  std::optional<std::string> next_task(const std::string& annotator_id) const;

  struct Ack {
    std::size_t rater_count = 0;
    bool finalized = false;
    bool replaced = false;
  };
  /// Validates, appends to the log and applies last-write-wins.
  Ack submit(const RatingRecord& record);

  const RoiInfo& roi(const std::string& roi_id) const;
  AggregatedLabel aggregate(const std::string& roi_id) const;
  std::vector<RoiProgress> progress() const;
  /// Finalized ROIs only, in ROI order.
  std::vector<RoiLabelRecord> export_labels() const;
  /// Every stored rating, ROI order then annotator id.
  std::vector<RatingRecord> ratings() const;
  bool is_annotator(const std::string& annotator_id) const;

 private:
  void apply(const RatingRecord& record);
  std::vector<RatingRecord> ratings_of(std::size_t roi) const;

  std::vector<RoiInfo> rois_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> annotators_;
  std::filesystem::path log_path_;
  std::vector<std::map<std::string, RatingRecord>> ratings_;  // per ROI, keyed by annotator
  mutable std::shared_mutex mutex_;
};

/// Registered annotator ids: one per non-empty line, '#' starts a comment.
std::vector<std::string> read_annotators(const std::filesystem::path& path);

}  // namespace roiqa
