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

#include <cstddef>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

/// Bilinear resampling with half-pixel centers and edge clamping.
ImageBuffer resize_bilinear(const ImageBuffer& image, std::size_t height, std::size_t width);

/// Exact-footprint box resampling; each output pixel is the area-weighted
/// mean of the input pixels it covers.
ImageBuffer resize_area(const ImageBuffer& image, std::size_t height, std::size_t width);

/// Channel-major copy (3 x H x W) for the tensor library.
std::vector<double> to_planar(const ImageBuffer& image);

// ITU-R BT.601 luma/chroma.
struct YCbCr {
  double y;
  double cb;
  double cr;
};
YCbCr rgb_to_ycbcr(double r, double g, double b);
void ycbcr_to_rgb(const YCbCr& c, double& r, double& g, double& b);

}  // namespace roiqa
