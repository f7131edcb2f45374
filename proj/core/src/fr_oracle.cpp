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

#include "roiqa/fr_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roiqa/image_ops.hpp"
#include "roiqa/mask.hpp"

namespace roiqa {

namespace {

using K = FrOracleConstants;

struct Plane {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;

  double at(std::size_t r, std::size_t c) const { return v[r * w + c]; }
};

struct Planes {
  Plane y, cb, cr;
};

Planes split_ycbcr(const ImageBuffer& img) {
  Planes p;
  for (Plane* q : {&p.y, &p.cb, &p.cr}) {
    q->h = img.height();
    q->w = img.width();
    q->v.resize(img.pixel_count());
  }
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto c = rgb_to_ycbcr(img.data()[i * 3], img.data()[i * 3 + 1], img.data()[i * 3 + 2]);
    p.y.v[i] = c.y;
    p.cb.v[i] = c.cb;
    p.cr.v[i] = c.cr;
  }
  return p;
}

Plane halve(const Plane& in) {
  Plane out;
  out.h = in.h / 2;
  out.w = in.w / 2;
  out.v.resize(out.h * out.w);
  for (std::size_t r = 0; r < out.h; ++r) {
    for (std::size_t c = 0; c < out.w; ++c) {
      out.v[r * out.w + c] = 0.25 * (in.at(2 * r, 2 * c) + in.at(2 * r, 2 * c + 1) +
                                     in.at(2 * r + 1, 2 * c) + in.at(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

double window_ssim_mean(const Plane& x, const Plane& y) {
  double total = 0;
  std::size_t count = 0;
  constexpr double n = K::kWindow * K::kWindow;
  for (std::size_t r = 0; r + K::kWindow <= x.h; r += K::kStride) {
    for (std::size_t c = 0; c + K::kWindow <= x.w; c += K::kStride) {
      double sx = 0, sy = 0;
      for (std::size_t i = 0; i < K::kWindow; ++i) {
        for (std::size_t j = 0; j < K::kWindow; ++j) {
          sx += x.at(r + i, c + j);
          sy += y.at(r + i, c + j);
        }
      }
      const double mx = sx / n;
      const double my = sy / n;
      double vxx = 0, vyy = 0, vxy = 0;
      for (std::size_t i = 0; i < K::kWindow; ++i) {
        for (std::size_t j = 0; j < K::kWindow; ++j) {
          const double dx = x.at(r + i, c + j) - mx;
          const double dy = y.at(r + i, c + j) - my;
          vxx += dx * dx;
          vyy += dy * dy;
          vxy += dx * dy;
        }
      }
      vxx /= n;
      vyy /= n;
      vxy /= n;
      const double lum = (2 * mx * my + K::kC1) / (mx * mx + my * my + K::kC1);
      const double cs = (2 * vxy + K::kC2) / (vxx + vyy + K::kC2);
      total += lum * cs;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double chroma_distance(const Planes& a, const Planes& b) {
  double total = 0;
  for (std::size_t i = 0; i < a.cb.v.size(); ++i) {
    const double dcb = a.cb.v[i] - b.cb.v[i];
    const double dcr = a.cr.v[i] - b.cr.v[i];
    total += std::sqrt(dcb * dcb + dcr * dcr);
  }
  return total / static_cast<double>(a.cb.v.size());
}

}  // namespace

double fr_score(const ImageBuffer& dist, const ImageBuffer& ref) {
  if (dist.height() != ref.height() || dist.width() != ref.width()) {
    throw Error("fr_score: dimension mismatch");
  }
  if (std::min(dist.height(), dist.width()) < K::kWindow) {
    throw Error("fr_score: image smaller than one 8x8 window");
  }
  Planes a = split_ycbcr(dist);
  Planes b = split_ycbcr(ref);
  double log_sum = 0;
  std::size_t scales = 0;
  for (std::size_t s = 0; s < K::kScales; ++s) {
    if (s > 0) {
      if (std::min(a.y.h, a.y.w) / 2 < K::kWindow) break;
      for (auto* planes : {&a, &b}) {
        planes->y = halve(planes->y);
        planes->cb = halve(planes->cb);
        planes->cr = halve(planes->cr);
      }
    }
    const double structural = std::clamp(window_ssim_mean(a.y, b.y), 0.0, 1.0);
    const double chroma = 1.0 / (1.0 + K::kChromaWeight * chroma_distance(a, b));
    const double value = structural * chroma;
    if (value <= 0.0) return 0.0;
    log_sum += std::log(value);
    ++scales;
  }
  return std::clamp(std::exp(log_sum / static_cast<double>(scales)), 0.0, 1.0);
}

double roi_quality_score(const ImageBuffer& dist, const ImageBuffer& ref, const RegionMask& mask) {
  const CroppedRoi d = crop_to_min_rect(dist, mask);
  const CroppedRoi r = crop_to_min_rect(ref, mask);
  return fr_score(d.patch, r.patch);
}

double roi_importance_score(const ImageBuffer& dist, const ImageBuffer& ref,
                            const RegionMask& mask) {
  if (dist.height() != ref.height() || dist.width() != ref.width()) {
    throw Error("roi_importance_score: dimension mismatch");
  }
  ImageBuffer replaced = ref;
  embed_roi(crop_to_min_rect(dist, mask), replaced);
  return std::clamp(1.0 - fr_score(replaced, ref), 0.0, 1.0);
}

PresenceLabel distortion_label(double quality, DistortionType applied, double threshold) {
  return {!(quality > threshold), applied};
}

Level discretize(double score, const LevelScale& scale) {
  const double m = scale.max_value;
  if (!(m > 0)) throw Error("discretize: scale maximum must be positive");
  if (!(score >= 0.0 && score <= m)) {
    throw Error("discretize: score " + std::to_string(score) + " outside [0, " +
                std::to_string(m) + "]");
  }
  auto i = static_cast<long>(std::ceil(score * 5.0 / m)) - 1;
  i = std::clamp(i, 0L, 4L);
  // Settle rounding at the bin edges against the defining inequalities.
  while (i > 0 && score <= m * static_cast<double>(i) / 5.0) --i;
  while (i < 4 && score > m * static_cast<double>(i + 1) / 5.0) ++i;
  const auto index = static_cast<std::size_t>(i);
  return {index, scale.categories()[index]};
}

}  // namespace roiqa
