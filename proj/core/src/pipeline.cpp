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

#include "roiqa/pipeline.hpp"

#include <map>

#include "roiqa/image_io.hpp"
#include "roiqa/mask.hpp"
#include "roiqa/parallel.hpp"
#include "roiqa/random.hpp"
#include "roiqa/records.hpp"

namespace roiqa {

namespace fs = std::filesystem;

std::string mask_path_for(const std::string& image_id, std::size_t k) {
  return "masks/" + image_id.substr(0, 16) + "_m" + std::to_string(k) + ".json";
}

std::string make_roi_id(const ManifestEntry& entry, std::size_t k) {
  return fs::path(entry.distorted_path).stem().string() + "#m" + std::to_string(k);
}

std::size_t mask_index_of(const std::string& roi_id) {
  const auto pos = roi_id.rfind("#m");
  if (pos == std::string::npos || pos + 2 >= roi_id.size()) {
    throw Error("roi_id '" + roi_id + "' has no mask suffix");
  }
  return std::stoul(roi_id.substr(pos + 2));
}

DatasetManifest propose_dataset_masks(const DatasetManifest& manifest, const fs::path& dataset_dir,
                                      const MaskProposalOptions& options) {
  std::map<std::string, std::string> references;  // image_id -> reference path
  for (const auto& e : manifest.records) references.emplace(e.image_id, e.reference_path);
  std::vector<std::pair<std::string, std::string>> refs(references.begin(), references.end());

  std::vector<std::size_t> mask_counts(refs.size(), 0);
  parallel_for(refs.size(), options.jobs, [&](std::size_t i) {
    const auto& [image_id, ref_path] = refs[i];
    const ImageBuffer ref = read_png(dataset_dir / ref_path);
    const auto masks =
        propose_masks(ref, options.per_image, mix_keys(options.seed, fnv1a64(image_id)));
    for (std::size_t k = 0; k < masks.size(); ++k) {
      write_file_atomic(dataset_dir / mask_path_for(image_id, k), rle_to_json(encode_rle(masks[k])));
    }
    mask_counts[i] = masks.size();
  });

  std::map<std::string, std::size_t> count_by_id;
  for (std::size_t i = 0; i < refs.size(); ++i) count_by_id[refs[i].first] = mask_counts[i];

  DatasetManifest out = manifest;
  for (auto& e : out.records) {
    e.roi_ids.clear();
    for (std::size_t k = 0; k < count_by_id[e.image_id]; ++k) e.roi_ids.push_back(make_roi_id(e, k));
  }
  return out;
}

RoiLabelRecord label_roi(const ImageBuffer& dist, const ImageBuffer& ref, const RegionMask& mask,
                         const ManifestEntry& entry, const std::string& roi_id,
                         const std::string& mask_path, double clean_threshold) {
  RoiLabelRecord r;
  r.roi_id = roi_id;
  r.image_id = entry.image_id;
  r.mask = mask_path;
  r.quality_score = {roi_quality_score(dist, ref, mask), ScoreScale::Oracle};
  r.importance_score = {roi_importance_score(dist, ref, mask), ScoreScale::Oracle};
  const auto presence = distortion_label(r.quality_score.value, entry.distortion_type,
                                         clean_threshold);
  for (DistortionType t : kAllDistortionTypes) {
    DistortionLabel d{t, false, std::nullopt};
    if (t == entry.distortion_type && presence.present) {
      d.present = true;
      d.severity = r.quality_score.to_human().value;
    }
    r.distortions.push_back(d);
  }
  r.source = LabelSource::SyntheticOracle;
  r.mask_level = MaskLevel::Component;
  return r;
}

std::vector<RoiLabelRecord> label_dataset(const DatasetManifest& manifest,
                                          const fs::path& dataset_dir,
                                          const LabelOptions& options) {
  std::vector<RoiLabelRecord> out;
  std::vector<std::size_t> first(manifest.records.size());
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    first[i] = out.size();
    out.resize(out.size() + manifest.records[i].roi_ids.size());
  }
  parallel_for(manifest.records.size(), options.jobs, [&](std::size_t i) {
    const auto& e = manifest.records[i];
    if (e.roi_ids.empty()) return;
    const ImageBuffer ref = read_png(dataset_dir / e.reference_path);
    const ImageBuffer dist = read_png(dataset_dir / e.distorted_path);
    for (std::size_t k = 0; k < e.roi_ids.size(); ++k) {
      const std::string mask_path = mask_path_for(e.image_id, mask_index_of(e.roi_ids[k]));
      const RegionMask mask = decode_mask(read_bytes(dataset_dir / mask_path),
                                          MaskDims{ref.height(), ref.width()});
      out[first[i] + k] = label_roi(dist, ref, mask, e, e.roi_ids[k], mask_path,
                                    options.clean_threshold);
    }
  });
  return out;
}

}  // namespace roiqa
