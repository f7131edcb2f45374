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

#include "roiqa/mask.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "json_util.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/random.hpp"

namespace roiqa {

RleMask encode_rle(const RegionMask& mask) {
  RleMask rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::uint64_t run = 0;
  for (std::uint8_t bit : mask.bits()) {
    if (bit != current) {
      rle.counts.push_back(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  rle.counts.push_back(run);
  return rle;
}

RegionMask decode_rle(const RleMask& rle) {
  const std::uint64_t total = static_cast<std::uint64_t>(rle.height) * rle.width;
  std::uint64_t sum = 0;
  for (std::uint64_t c : rle.counts) {
    if (c > total || sum + c > total) {
      throw Error("RLE runs exceed " + std::to_string(rle.height) + "x" +
                  std::to_string(rle.width));
    }
    sum += c;
  }
  if (sum != total) {
    throw Error("RLE runs sum to " + std::to_string(sum) + ", expected " + std::to_string(total));
  }
  std::vector<std::uint8_t> bits;
  bits.reserve(total);
  std::uint8_t value = 0;
  for (std::uint64_t c : rle.counts) {
    bits.insert(bits.end(), c, value);
    value ^= 1;
  }
  return RegionMask(rle.height, rle.width, std::move(bits));
}

std::string rle_to_json(const RleMask& rle) {
  detail::Json j;
  j["size"] = {rle.height, rle.width};
  j["counts"] = rle.counts;
  return detail::dump_line(j);
}

RleMask parse_rle_json(std::string_view text) {
  constexpr std::string_view what = "RLE mask";
  const auto j = detail::parse_json(text, what);
  const auto size = detail::require<std::vector<std::int64_t>>(j, "size", what);
  if (size.size() != 2 || size[0] < 0 || size[1] < 0) throw Error("RLE mask: size must be [H,W]");
  RleMask rle;
  rle.height = static_cast<std::size_t>(size[0]);
  rle.width = static_cast<std::size_t>(size[1]);
  for (const auto& c : detail::require<detail::Json>(j, "counts", what)) {
    if (!c.is_number_unsigned()) throw Error("RLE mask: counts must be unsigned integers");
    rle.counts.push_back(c.get<std::uint64_t>());
  }
  return rle;
}

RegionMask decode_mask(std::span<const std::uint8_t> bytes, std::optional<MaskDims> expected) {
  RegionMask mask;
  if (looks_like_png(bytes)) {
    mask = decode_mask_png(bytes);
  } else {
    mask = decode_rle(
        parse_rle_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
  }
  if (expected && (mask.height() != expected->height || mask.width() != expected->width)) {
    throw Error("mask is " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                ", expected " + std::to_string(expected->height) + "x" +
                std::to_string(expected->width));
  }
  return mask;
}

std::vector<RegionMask> filter_small(std::vector<RegionMask> masks) {
  std::erase_if(masks, [](const RegionMask& m) { return m.popcount() < kMinRoiArea; });
  return masks;
}

std::vector<RegionMask> propose_masks(const ImageBuffer& image, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("propose_masks: n must be at least 1");
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t area = h * w;
  const auto cap = static_cast<std::size_t>(std::floor(kProposalAreaCap * static_cast<double>(area)));
  const double tau2 = kProposalColorThreshold * kProposalColorThreshold;

  std::vector<std::uint8_t> taken(area, 0);
  std::vector<std::uint32_t> stamp(area, 0);
  std::vector<RegionMask> out;
  Rng rng(seed);
  const std::size_t attempts = std::max<std::size_t>(64, 32 * n);

  for (std::uint32_t attempt = 1; attempt <= attempts && out.size() < n; ++attempt) {
    const std::size_t start = rng.index(area);
    if (taken[start]) continue;

    std::vector<std::size_t> region{start};
    std::deque<std::size_t> queue{start};
    stamp[start] = attempt;
    double mean[3] = {image.data()[start * 3], image.data()[start * 3 + 1],
                      image.data()[start * 3 + 2]};

    while (!queue.empty() && region.size() < cap) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const std::size_t r = p / w;
      const std::size_t c = p % w;
      const std::size_t neighbours[4] = {r > 0 ? p - w : area, c + 1 < w ? p + 1 : area,
                                         r + 1 < h ? p + w : area, c > 0 ? p - 1 : area};
      for (std::size_t q : neighbours) {
        if (q == area || taken[q] || stamp[q] == attempt) continue;
        stamp[q] = attempt;
        double d2 = 0;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const double d = image.data()[q * 3 + ch] - mean[ch];
          d2 += d * d;
        }
        if (d2 > tau2) continue;
        region.push_back(q);
        queue.push_back(q);
        const auto k = static_cast<double>(region.size());
        for (std::size_t ch = 0; ch < 3; ++ch) mean[ch] += (image.data()[q * 3 + ch] - mean[ch]) / k;
        if (region.size() >= cap) break;
      }
    }

    if (region.size() < kMinRoiArea) continue;
    RegionMask mask(h, w);
    for (std::size_t p : region) {
      mask.set(p / w, p % w, true);
      taken[p] = 1;
    }
    out.push_back(std::move(mask));
  }
  return out;
}

CroppedRoi crop_to_min_rect(const ImageBuffer& image, const RegionMask& mask) {
  if (mask.height() != image.height() || mask.width() != image.width()) {
    throw Error("crop_to_min_rect: mask and image dimensions differ");
  }
  std::size_t r0 = mask.height(), r1 = 0, c0 = mask.width(), c1 = 0;
  bool any = false;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      any = true;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
    }
  }
  if (!any) throw Error("crop_to_min_rect: empty mask");

  CroppedRoi roi;
  roi.row_offset = r0;
  roi.col_offset = c0;
  roi.patch = ImageBuffer(r1 - r0 + 1, c1 - c0 + 1);
  roi.inner_mask = RegionMask(r1 - r0 + 1, c1 - c0 + 1);
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      if (!mask.at(r, c)) continue;
      roi.inner_mask.set(r - r0, c - c0, true);
      for (std::size_t ch = 0; ch < 3; ++ch) roi.patch.at(r - r0, c - c0, ch) = image.at(r, c, ch);
    }
  }
  return roi;
}

void embed_roi(const CroppedRoi& roi, ImageBuffer& target) {
  for (std::size_t r = 0; r < roi.inner_mask.height(); ++r) {
    for (std::size_t c = 0; c < roi.inner_mask.width(); ++c) {
      if (!roi.inner_mask.at(r, c)) continue;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        target.at(r + roi.row_offset, c + roi.col_offset, ch) = roi.patch.at(r, c, ch);
      }
    }
  }
}

namespace {

struct Overlap {
  std::size_t index;
  std::uint64_t length;  // in units of 1/(grid cells)
};

// Scaled by `cells`, mask pixel i spans [i*cells, (i+1)*cells) and grid cell
// k spans [k*pixels, (k+1)*pixels); overlaps are exact integers.
std::vector<std::vector<Overlap>> integer_footprints(std::size_t pixels, std::size_t cells) {
  std::vector<std::vector<Overlap>> out(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const std::uint64_t lo = static_cast<std::uint64_t>(k) * pixels;
    const std::uint64_t hi = lo + pixels;
    for (std::size_t i = lo / cells; i < pixels && static_cast<std::uint64_t>(i) * cells < hi; ++i) {
      const std::uint64_t a = std::max<std::uint64_t>(lo, static_cast<std::uint64_t>(i) * cells);
      const std::uint64_t b = std::min<std::uint64_t>(hi, static_cast<std::uint64_t>(i + 1) * cells);
      if (b > a) out[k].push_back({i, b - a});
    }
  }
  return out;
}

}  // namespace

std::vector<double> coverage_fractions(const RegionMask& mask, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) throw Error("coverage_fractions: empty grid");
  const auto rows = integer_footprints(mask.height(), h);
  const auto cols = integer_footprints(mask.width(), w);
  const auto cell_area = static_cast<double>(static_cast<std::uint64_t>(mask.height()) *
                                             mask.width());
  std::vector<double> out(h * w, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      std::uint64_t covered = 0;
      for (const Overlap& ry : rows[i]) {
        for (const Overlap& cx : cols[j]) {
          if (mask.at(ry.index, cx.index)) covered += ry.length * cx.length;
        }
      }
      out[i * w + j] = static_cast<double>(covered) / cell_area;
    }
  }
  return out;
}

std::vector<double> mask_pool(std::span<const double> featmap, std::size_t channels,
                              std::size_t h, std::size_t w, const RegionMask& mask) {
  if (featmap.size() != channels * h * w) throw Error("mask_pool: featmap shape mismatch");
  if (mask.popcount() == 0) throw Error("mask_pool: empty mask");
  const auto weights = coverage_fractions(mask, h, w);
  double total = 0;
  for (double v : weights) total += v;
  if (!(total > 0)) throw Error("mask_pool: internal error, zero total coverage");
  std::vector<double> out(channels, 0.0);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const double* f = featmap.data() + ch * h * w;
    double acc = 0;
    for (std::size_t k = 0; k < h * w; ++k) acc += weights[k] * f[k];
    out[ch] = acc / total;
  }
  return out;
}

}  // namespace roiqa
