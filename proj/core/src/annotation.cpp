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

#include "roiqa/annotation.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

#include "json_util.hpp"
#include "roiqa/fr_oracle.hpp"
#include "roiqa/pipeline.hpp"
#include "roiqa/records.hpp"

namespace roiqa {

using detail::Json;

void RatingRecord::validate() const {
  if (roi_id.empty()) throw ValidationError("rating: roi_id is empty");
  if (annotator_id.empty()) throw ValidationError("rating: annotator_id is empty");
  for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
    if (distortions[k] < 0 || distortions[k] > kNonExistentRating) {
      throw ValidationError("rating: " + std::string(to_string(kAllDistortionTypes[k])) +
                            " must be in 0..5, got " + std::to_string(distortions[k]));
    }
  }
  if (quality < 0 || quality > 4) {
    throw ValidationError("rating: quality must be in 0..4, got " + std::to_string(quality));
  }
  if (importance < 0 || importance > 4) {
    throw ValidationError("rating: importance must be in 0..4, got " + std::to_string(importance));
  }
}

std::string rating_to_json(const RatingRecord& r) {
  Json j;
  j["roi_id"] = r.roi_id;
  j["annotator_id"] = r.annotator_id;
  Json d = Json::object();
  for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
    d[std::string(to_string(kAllDistortionTypes[k]))] = r.distortions[k];
  }
  j["distortions"] = std::move(d);
  j["quality"] = r.quality;
  j["importance"] = r.importance;
  j["timestamp"] = r.timestamp;
  return detail::dump_line(j);
}

namespace {

int strict_int(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("rating: missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("rating: field '") + key + "' must be an integer");
  }
  const auto x = v.get<std::int64_t>();
  if (x < -1000 || x > 1000) {
    throw ValidationError(std::string("rating: field '") + key + "' out of range");
  }
  return static_cast<int>(x);
}

std::string strict_string(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("rating: missing field '") + key + "'");
  if (!j.at(key).is_string()) {
    throw ValidationError(std::string("rating: field '") + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace

RatingRecord parse_rating(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("rating: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("rating: expected a JSON object");
  static const std::set<std::string> known = {"roi_id",  "annotator_id", "distortions",
                                              "quality", "importance",   "timestamp"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError("rating: unknown field '" + key + "'");
  }
  RatingRecord r;
  r.roi_id = strict_string(j, "roi_id");
  r.annotator_id = strict_string(j, "annotator_id");
  if (!j.contains("distortions") || !j.at("distortions").is_object()) {
    throw ValidationError("rating: 'distortions' must be an object");
  }
  const Json& d = j.at("distortions");
  if (d.size() != kDistortionTypeCount) {
    throw ValidationError("rating: 'distortions' must rate exactly the six distortion types");
  }
  for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
    r.distortions[k] = strict_int(d, std::string(to_string(kAllDistortionTypes[k])).c_str());
  }
  r.quality = strict_int(j, "quality");
  r.importance = strict_int(j, "importance");
  if (j.contains("timestamp")) r.timestamp = strict_string(j, "timestamp");
  r.validate();
  return r;
}

AggregatedLabel aggregate_roi(std::span<const RatingRecord> ratings) {
  if (ratings.empty()) throw Error("aggregate_roi: no ratings");
  std::set<std::string> annotators;
  for (const auto& r : ratings) {
    if (r.roi_id != ratings.front().roi_id) throw Error("aggregate_roi: ratings of different ROIs");
    if (!annotators.insert(r.annotator_id).second) {
      throw Error("aggregate_roi: annotator '" + r.annotator_id + "' rated twice");
    }
    r.validate();
  }
  AggregatedLabel a;
  a.roi_id = ratings.front().roi_id;
  a.rater_count = ratings.size();
  // Integer sums keep the means independent of rating order.
  long quality_sum = 0, importance_sum = 0;
  for (const auto& r : ratings) {
    quality_sum += r.quality;
    importance_sum += r.importance;
  }
  const auto n = static_cast<double>(a.rater_count);
  a.quality_mean = static_cast<double>(quality_sum) / n;
  a.importance_mean = static_cast<double>(importance_sum) / n;
  a.quality_level = discretize(a.quality_mean, LevelScale::quality(kHumanScaleMax)).index;
  a.importance_level = discretize(a.importance_mean, LevelScale::importance(kHumanScaleMax)).index;
  for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
    DistortionAggregate& d = a.distortions[k];
    d.type = kAllDistortionTypes[k];
    long sum = 0;
    std::size_t rated = 0;
    for (const auto& r : ratings) {
      if (r.distortions[k] == kNonExistentRating) {
        ++d.nonexistent_votes;
      } else {
        sum += r.distortions[k];
        ++rated;
      }
    }
    d.present = !(2 * d.nonexistent_votes > a.rater_count);
    if (d.present) {
      d.mean_severity = static_cast<double>(sum) / static_cast<double>(rated);
      d.severity_level = discretize(*d.mean_severity, LevelScale::severity(kHumanScaleMax)).index;
    }
  }
  a.finalized = a.rater_count >= kFinalizeRaters;
  return a;
}

AggregatedLabel finalize_roi(std::span<const RatingRecord> ratings) {
  if (ratings.size() < kFinalizeRaters) {
    throw Error("finalize_roi: " + std::to_string(ratings.size()) + " raters, need " +
                std::to_string(kFinalizeRaters));
  }
  return aggregate_roi(ratings);
}

std::string aggregated_to_json(const AggregatedLabel& a) {
  Json j;
  j["roi_id"] = a.roi_id;
  j["rater_count"] = a.rater_count;
  Json ds = Json::array();
  const LevelScale sev = LevelScale::severity(kHumanScaleMax);
  for (const auto& d : a.distortions) {
    Json e;
    e["type"] = std::string(to_string(d.type));
    e["present"] = d.present;
    e["nonexistent_votes"] = d.nonexistent_votes;
    e["mean_severity"] = d.mean_severity ? Json(*d.mean_severity) : Json(nullptr);
    e["severity"] = d.severity_level ? Json(std::string(sev.categories()[*d.severity_level]))
                                     : Json(nullptr);
    ds.push_back(std::move(e));
  }
  j["distortions"] = std::move(ds);
  j["quality_mean"] = a.quality_mean;
  j["quality"] = std::string(LevelScale::quality(kHumanScaleMax).categories()[a.quality_level]);
  j["importance_mean"] = a.importance_mean;
  j["importance"] =
      std::string(LevelScale::importance(kHumanScaleMax).categories()[a.importance_level]);
  j["finalized"] = a.finalized;
  return detail::dump_line(j);
}

RoiLabelRecord to_label_record(const AggregatedLabel& a, const std::string& image_id,
                               const std::string& mask_path, MaskLevel mask_level) {
  if (!a.finalized) throw Error("to_label_record: ROI '" + a.roi_id + "' is not finalized");
  RoiLabelRecord r;
  r.roi_id = a.roi_id;
  r.image_id = image_id;
  r.mask = mask_path;
  r.quality_score = {a.quality_mean, ScoreScale::Human};
  r.importance_score = {a.importance_mean, ScoreScale::Human};
  for (const auto& d : a.distortions) r.distortions.push_back({d.type, d.present, d.mean_severity});
  r.source = LabelSource::HumanAggregated;
  r.mask_level = mask_level;
  r.validate();
  return r;
}

std::vector<RoiInfo> rois_from_manifest(const DatasetManifest& manifest,
                                        const std::filesystem::path& dataset_dir) {
  std::vector<RoiInfo> out;
  for (const auto& e : manifest.records) {
    for (const auto& roi_id : e.roi_ids) {
      RoiInfo info;
      info.roi_id = roi_id;
      info.image_id = e.image_id;
      info.image_path = dataset_dir / e.distorted_path;
      info.mask_path = mask_path_for(e.image_id, mask_index_of(roi_id));
      info.dataset_dir = dataset_dir;
      out.push_back(std::move(info));
    }
  }
  return out;
}

AnnotationStore::AnnotationStore(std::vector<RoiInfo> rois, std::vector<std::string> annotators,
                                 std::filesystem::path log_path)
    : rois_(std::move(rois)), annotators_(std::move(annotators)), log_path_(std::move(log_path)) {
  for (std::size_t i = 0; i < rois_.size(); ++i) {
    if (!index_.emplace(rois_[i].roi_id, i).second) {
      throw Error("annotation store: duplicate ROI '" + rois_[i].roi_id + "'");
    }
  }
  ratings_.resize(rois_.size());
  if (std::filesystem::exists(log_path_)) {
    std::size_t line_no = 0;
    for (const auto& line : read_lines(log_path_)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const Json j = detail::parse_json(line, "annotation log");
        if (detail::require<std::string>(j, "event", "annotation log") != "rating") {
          throw Error("unknown event");
        }
        apply(parse_rating(j.at("rating").dump()));
      } catch (const Error& e) {
        throw Error("annotation log " + log_path_.string() + " line " + std::to_string(line_no) +
                    ": " + e.what());
      }
    }
  }
}

bool AnnotationStore::is_annotator(const std::string& id) const {
  return std::find(annotators_.begin(), annotators_.end(), id) != annotators_.end();
}

void AnnotationStore::apply(const RatingRecord& r) {
  const auto it = index_.find(r.roi_id);
  if (it == index_.end()) throw NotFoundError("unknown ROI '" + r.roi_id + "'");
  ratings_[it->second][r.annotator_id] = r;
}

std::optional<std::string> AnnotationStore::next_task(const std::string& annotator_id) const {
  if (!is_annotator(annotator_id)) throw NotFoundError("unknown annotator '" + annotator_id + "'");
  std::shared_lock lock(mutex_);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rois_.size(); ++i) {
    const auto& rs = ratings_[i];
    if (rs.size() >= kFinalizeRaters || rs.contains(annotator_id)) continue;
    if (!best || rs.size() > ratings_[*best].size()) best = i;
  }
  if (!best) return std::nullopt;
  return rois_[*best].roi_id;
}

AnnotationStore::Ack AnnotationStore::submit(const RatingRecord& record) {
  record.validate();
  if (!is_annotator(record.annotator_id)) {
    throw NotFoundError("unknown annotator '" + record.annotator_id + "'");
  }
  std::unique_lock lock(mutex_);
  const auto it = index_.find(record.roi_id);
  if (it == index_.end()) throw NotFoundError("unknown ROI '" + record.roi_id + "'");
  auto& rs = ratings_[it->second];
  if (rs.size() >= kFinalizeRaters) {
    throw ConflictError("ROI '" + record.roi_id + "' is finalized");
  }
  RatingRecord r = record;
  if (r.timestamp.empty()) r.timestamp = utc_now();
  Json event;
  event["event"] = "rating";
  event["rating"] = Json::parse(rating_to_json(r));
  {
    std::ofstream log(log_path_, std::ios::app | std::ios::binary);
    if (!log) throw Error("cannot open annotation log " + log_path_.string());
    log << detail::dump_line(event) << '\n';
    log.flush();
    if (!log) throw Error("cannot append to annotation log " + log_path_.string());
  }
  const bool replaced = rs.contains(r.annotator_id);
  rs[r.annotator_id] = std::move(r);
  return {rs.size(), rs.size() >= kFinalizeRaters, replaced};
}

const RoiInfo& AnnotationStore::roi(const std::string& roi_id) const {
  const auto it = index_.find(roi_id);
  if (it == index_.end()) throw NotFoundError("unknown ROI '" + roi_id + "'");
  return rois_[it->second];
}

std::vector<RatingRecord> AnnotationStore::ratings_of(std::size_t i) const {
  std::vector<RatingRecord> out;
  for (const auto& [_, r] : ratings_[i]) out.push_back(r);
  return out;
}

AggregatedLabel AnnotationStore::aggregate(const std::string& roi_id) const {
  const auto it = index_.find(roi_id);
  if (it == index_.end()) throw NotFoundError("unknown ROI '" + roi_id + "'");
  std::shared_lock lock(mutex_);
  const auto rs = ratings_of(it->second);
  if (rs.empty()) {
    AggregatedLabel empty;
    empty.roi_id = roi_id;
    return empty;
  }
  return aggregate_roi(rs);
}

std::vector<RoiProgress> AnnotationStore::progress() const {
  std::shared_lock lock(mutex_);
  std::vector<RoiProgress> out;
  for (std::size_t i = 0; i < rois_.size(); ++i) {
    out.push_back({rois_[i].roi_id, ratings_[i].size(), ratings_[i].size() >= kFinalizeRaters});
  }
  return out;
}

std::vector<RoiLabelRecord> AnnotationStore::export_labels() const {
  std::shared_lock lock(mutex_);
  std::vector<RoiLabelRecord> out;
  for (std::size_t i = 0; i < rois_.size(); ++i) {
    if (ratings_[i].size() < kFinalizeRaters) continue;
    out.push_back(to_label_record(finalize_roi(ratings_of(i)), rois_[i].image_id,
                                  rois_[i].mask_path, rois_[i].mask_level));
  }
  return out;
}

std::vector<RatingRecord> AnnotationStore::ratings() const {
  std::shared_lock lock(mutex_);
  std::vector<RatingRecord> out;
  for (std::size_t i = 0; i < rois_.size(); ++i) {
    for (const auto& [_, r] : ratings_[i]) out.push_back(r);
  }
  return out;
}

std::vector<std::string> read_annotators(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (std::string line : read_lines(path)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  if (out.empty()) throw Error("no annotators listed in " + path.string());
  return out;
}

}  // namespace roiqa
