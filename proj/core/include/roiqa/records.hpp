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
#include <string>
#include <string_view>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

// JSON-lines wire forms. Each *_to_json returns a single line without the
// trailing newline; parse_* accepts one line.

std::string roi_label_to_json(const RoiLabelRecord& record);
RoiLabelRecord parse_roi_label(std::string_view line);

std::string manifest_entry_to_json(const ManifestEntry& entry);
ManifestEntry parse_manifest_entry(std::string_view line);

std::vector<RoiLabelRecord> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<RoiLabelRecord>& records);

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Reads non-empty lines of a text file.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Partitions by image_id so every record of one image lands in one split.
/// Returns (train, test); both carry their split tag.
std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& manifest,
                                                          double train_fraction,
                                                          std::uint64_t seed);

}  // namespace roiqa
