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

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>

#include "roiqa/distortion.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/parallel.hpp"
#include "roiqa/records.hpp"

namespace roiqa {

namespace fs = std::filesystem;

namespace {

struct Reference {
  std::string image_id;
  std::string rel_path;
  ImageBuffer image;
};

std::string short_id(const std::string& image_id) { return image_id.substr(0, 16); }

std::string dist_name(const std::string& image_id, DistortionType type, std::size_t level) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02zu", level);
  return short_id(image_id) + "_" + std::string(to_string(type)) + "_" + buf + ".png";
}

}  // namespace

DatasetManifest synth_dataset(const fs::path& ref_dir, const fs::path& out_dir,
                              const SynthOptions& options) {
  if (!fs::is_directory(ref_dir)) throw Error("synth: not a directory: " + ref_dir.string());
  if (options.families.empty()) throw Error("synth: no distortion families selected");

  std::vector<std::size_t> levels = options.levels;
  if (levels.empty()) {
    for (std::size_t l = 0; l < kLevelsPerFamily; ++l) levels.push_back(l);
  }
  for (std::size_t l : levels) {
    if (l >= kLevelsPerFamily) throw Error("synth: level " + std::to_string(l) + " out of 0..19");
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(ref_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::error_code ec;
  fs::create_directories(out_dir / "ref", ec);
  fs::create_directories(out_dir / "dist", ec);
  if (ec || !fs::is_directory(out_dir / "dist")) {
    throw Error("synth: cannot create output directory " + out_dir.string());
  }

  std::vector<Reference> refs;
  std::set<std::string> seen;
  for (const auto& file : files) {
    const Bytes bytes = read_bytes(file);
    Reference ref;
    ref.image_id = sha256_hex(bytes);
    if (!seen.insert(ref.image_id).second) continue;  // identical content
    try {
      ref.image = decode_png(bytes);
    } catch (const Error& e) {
      throw Error("synth: " + file.string() + ": " + e.what());
    }
    if (ref.image.height() < 32 || ref.image.width() < 32) {
      throw Error("synth: " + file.string() + " is smaller than 32x32");
    }
    ref.rel_path = "ref/" + short_id(ref.image_id) + ".png";
    write_file_atomic(out_dir / ref.rel_path,
                      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    refs.push_back(std::move(ref));
  }
  if (refs.empty()) throw Error("synth: no decodable PNG images in " + ref_dir.string());

  DatasetManifest manifest;
  for (const auto& ref : refs) {
    for (DistortionType type : options.families) {
      for (std::size_t level : levels) {
        ManifestEntry e;
        e.image_id = ref.image_id;
        e.reference_path = ref.rel_path;
        e.distorted_path = "dist/" + dist_name(ref.image_id, type, level);
        e.distortion_type = type;
        e.parameter_index = static_cast<int>(level);
        e.parameter_value = param_grid(type)[level];
        manifest.records.push_back(std::move(e));
      }
    }
  }

  const std::size_t per_ref = options.families.size() * levels.size();
  parallel_for(manifest.records.size(), options.jobs, [&](std::size_t i) {
    const auto& entry = manifest.records[i];
    const Reference& ref = refs[i / per_ref];
    const auto spec = DistortionSpec::at_level(
        entry.distortion_type, static_cast<std::size_t>(entry.parameter_index), options.seed);
    write_png(out_dir / entry.distorted_path, apply_distortion(ref.image, spec, ref.image_id));
  });

  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

}  // namespace roiqa
