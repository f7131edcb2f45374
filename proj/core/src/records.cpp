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

#include "roiqa/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "roiqa/random.hpp"

namespace roiqa {

using detail::Json;
using detail::require;

namespace {

Json score_to_json(const Score& s) {
  return Json{{"value", s.value}, {"scale", to_string(s.scale)}};
}

Score score_from_json(const Json& j, std::string_view what) {
  return {require<double>(j, "value", what),
          parse_score_scale(require<std::string>(j, "scale", what))};
}

}  // namespace

std::string roi_label_to_json(const RoiLabelRecord& record) {
  Json distortions = Json::array();
  for (const auto& d : record.distortions) {
    Json item{{"type", to_string(d.type)}, {"present", d.present}};
    item["severity"] = d.severity ? Json(*d.severity) : Json(nullptr);
    distortions.push_back(std::move(item));
  }
  Json j;
  j["roi_id"] = record.roi_id;
  j["image_id"] = record.image_id;
  j["mask"] = record.mask;
  j["quality_score"] = score_to_json(record.quality_score);
  j["importance_score"] = score_to_json(record.importance_score);
  j["distortions"] = std::move(distortions);
  j["source"] = to_string(record.source);
  j["mask_level"] = to_string(record.mask_level);
  return detail::dump_line(j);
}

RoiLabelRecord parse_roi_label(std::string_view line) {
  constexpr std::string_view what = "RoiLabelRecord";
  const Json j = detail::parse_json(line, what);
  RoiLabelRecord r;
  r.roi_id = require<std::string>(j, "roi_id", what);
  r.image_id = require<std::string>(j, "image_id", what);
  r.mask = require<std::string>(j, "mask", what);
  r.quality_score = score_from_json(require<Json>(j, "quality_score", what), what);
  r.importance_score = score_from_json(require<Json>(j, "importance_score", what), what);
  for (const auto& item : require<Json>(j, "distortions", what)) {
    DistortionLabel d;
    d.type = parse_distortion_type(require<std::string>(item, "type", what));
    d.present = require<bool>(item, "present", what);
    if (item.contains("severity") && !item.at("severity").is_null()) {
      d.severity = item.at("severity").get<double>();
    }
    r.distortions.push_back(d);
  }
  r.source = parse_label_source(require<std::string>(j, "source", what));
  if (j.contains("mask_level")) {
    r.mask_level = parse_mask_level(j.at("mask_level").get<std::string>());
  }
  r.validate();
  return r;
}

std::string manifest_entry_to_json(const ManifestEntry& e) {
  Json j;
  j["image_id"] = e.image_id;
  j["reference_path"] = e.reference_path;
  j["distorted_path"] = e.distorted_path;
  j["distortion_type"] = to_string(e.distortion_type);
  j["parameter_index"] = e.parameter_index;
  j["parameter_value"] = e.parameter_value;
  j["roi_ids"] = e.roi_ids;
  j["split"] = e.split ? Json(to_string(*e.split)) : Json(nullptr);
  return detail::dump_line(j);
}

ManifestEntry parse_manifest_entry(std::string_view line) {
  constexpr std::string_view what = "manifest record";
  const Json j = detail::parse_json(line, what);
  ManifestEntry e;
  e.image_id = require<std::string>(j, "image_id", what);
  e.reference_path = require<std::string>(j, "reference_path", what);
  e.distorted_path = require<std::string>(j, "distorted_path", what);
  e.distortion_type = parse_distortion_type(require<std::string>(j, "distortion_type", what));
  e.parameter_index = require<int>(j, "parameter_index", what);
  e.parameter_value = require<double>(j, "parameter_value", what);
  e.roi_ids = require<std::vector<std::string>>(j, "roi_ids", what);
  if (j.contains("split") && !j.at("split").is_null()) {
    e.split = parse_split(j.at("split").get<std::string>());
  }
  return e;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<RoiLabelRecord> read_labels(const std::filesystem::path& path) {
  std::vector<RoiLabelRecord> out;
  for (const auto& line : read_lines(path)) out.push_back(parse_roi_label(line));
  return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<RoiLabelRecord>& records) {
  std::string text;
  for (const auto& r : records) {
    text += roi_label_to_json(r);
    text += '\n';
  }
  write_file_atomic(path, text);
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  DatasetManifest m;
  for (const auto& line : read_lines(path)) m.records.push_back(parse_manifest_entry(line));
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::string text;
  for (const auto& e : manifest.records) {
    text += manifest_entry_to_json(e);
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& manifest,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("split_dataset: train_fraction must lie in (0,1)");
  }
  std::set<std::string> unique;
  for (const auto& e : manifest.records) unique.insert(e.image_id);
  if (unique.size() < 2) {
    throw Error("split_dataset: need at least 2 distinct image_ids, got " +
                std::to_string(unique.size()));
  }
  std::vector<std::string> ids(unique.begin(), unique.end());
  Rng rng(seed);
  rng.shuffle(ids.begin(), ids.end());

  const auto n = static_cast<long>(ids.size());
  const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
  const std::set<std::string> train_ids(ids.begin(), ids.begin() + n_train);

  DatasetManifest train;
  DatasetManifest test;
  for (const auto& e : manifest.records) {
    ManifestEntry copy = e;
    if (train_ids.contains(e.image_id)) {
      copy.split = Split::Train;
      train.records.push_back(std::move(copy));
    } else {
      copy.split = Split::Test;
      test.records.push_back(std::move(copy));
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace roiqa
