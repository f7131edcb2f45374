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

// Dataset-level steps that sit between synthesis and training: ROI proposal
// for every reference and oracle labeling of every (distorted image, ROI).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roiqa/fr_oracle.hpp"
#include "roiqa/types.hpp"

namespace roiqa {

struct MaskProposalOptions {
  std::size_t per_image = 3;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Relative path of the k-th mask of a reference, "masks/<id16>_m<k>.json".
std::string mask_path_for(const std::string& image_id, std::size_t k);

/// "<distorted file stem>#m<k>"
std::string make_roi_id(const ManifestEntry& entry, std::size_t k);
std::size_t mask_index_of(const std::string& roi_id);

/// Proposes masks on every distinct reference (seed mixed with image_id),
/// writes them as JSON RLE under `dataset_dir/masks`, and returns the
/// manifest with roi_ids filled in. References that yield no mask keep an
/// empty roi list.
DatasetManifest propose_dataset_masks(const DatasetManifest& manifest,
                                      const std::filesystem::path& dataset_dir,
                                      const MaskProposalOptions& options);

struct LabelOptions {
  double clean_threshold = kCleanThreshold;
  unsigned jobs = 1;
};

/// Oracle label for one ROI of one distorted image. Severity of the applied
/// distortion is the quality score mapped onto the human [0,4] scale.
RoiLabelRecord label_roi(const ImageBuffer& dist, const ImageBuffer& ref, const RegionMask& mask,
                         const ManifestEntry& entry, const std::string& roi_id,
                         const std::string& mask_path, double clean_threshold = kCleanThreshold);

/// Labels every ROI listed in the manifest, in manifest order.
std::vector<RoiLabelRecord> label_dataset(const DatasetManifest& manifest,
                                          const std::filesystem::path& dataset_dir,
                                          const LabelOptions& options);

}  // namespace roiqa
