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

#include "roiqa/image_ops.hpp"

#include <algorithm>
#include <cmath>

namespace roiqa {

ImageBuffer resize_bilinear(const ImageBuffer& image, std::size_t height, std::size_t width) {
  if (image.empty() || height == 0 || width == 0) throw Error("resize_bilinear: empty size");
  ImageBuffer out(height, width);
  const double sy = static_cast<double>(image.height()) / static_cast<double>(height);
  const double sx = static_cast<double>(image.width()) / static_cast<double>(width);
  const auto max_r = static_cast<double>(image.height() - 1);
  const auto max_c = static_cast<double>(image.width() - 1);
  for (std::size_t r = 0; r < height; ++r) {
    const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_r);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t c = 0; c < width; ++c) {
      const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, max_c);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double top = (1 - wx) * image.at(y0, x0, ch) + wx * image.at(y0, x1, ch);
        const double bot = (1 - wx) * image.at(y1, x0, ch) + wx * image.at(y1, x1, ch);
        out.at(r, c, ch) = (1 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

namespace {

struct Tap {
  std::size_t index;
  double weight;
};

// For each output cell, the input indices it overlaps and the overlap length
// normalized by the cell length.
std::vector<std::vector<Tap>> footprint_taps(std::size_t in, std::size_t out) {
  std::vector<std::vector<Tap>> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double lo = static_cast<double>(o) * scale;
    const double hi = static_cast<double>(o + 1) * scale;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t i = first; i < last; ++i) {
      const double overlap =
          std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
      if (overlap > 0) taps[o].push_back({i, overlap / scale});
    }
  }
  return taps;
}

}  // namespace

ImageBuffer resize_area(const ImageBuffer& image, std::size_t height, std::size_t width) {
  if (image.empty() || height == 0 || width == 0) throw Error("resize_area: empty size");
  if (height == image.height() && width == image.width()) return image;
  const auto rows = footprint_taps(image.height(), height);
  const auto cols = footprint_taps(image.width(), width);
  ImageBuffer out(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double acc[3] = {0, 0, 0};
      for (const Tap& ty : rows[r]) {
        for (const Tap& tx : cols[c]) {
          const double w = ty.weight * tx.weight;
          for (std::size_t ch = 0; ch < 3; ++ch) acc[ch] += w * image.at(ty.index, tx.index, ch);
        }
      }
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = acc[ch];
    }
  }
  return out;
}

std::vector<double> to_planar(const ImageBuffer& image) {
  const std::size_t n = image.pixel_count();
  std::vector<double> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < 3; ++ch) out[ch * n + i] = image.data()[i * 3 + ch];
  }
  return out;
}

YCbCr rgb_to_ycbcr(double r, double g, double b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return {y, (b - y) / 1.772, (r - y) / 1.402};
}

void ycbcr_to_rgb(const YCbCr& c, double& r, double& g, double& b) {
  r = c.y + 1.402 * c.cr;
  b = c.y + 1.772 * c.cb;
  g = (c.y - 0.299 * r - 0.114 * b) / 0.587;
}

}  // namespace roiqa
