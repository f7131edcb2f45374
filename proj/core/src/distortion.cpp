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

#include "roiqa/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "roiqa/image_ops.hpp"
#include "roiqa/random.hpp"

namespace roiqa {

namespace {

struct Range {
  double mild;
  double extreme;
};

ParamGrid one_sided(Range r) {
  ParamGrid g{};
  for (std::size_t k = 0; k < kLevelsPerFamily; ++k) {
    g[k] = r.mild + (r.extreme - r.mild) * normalized_severity(k);
  }
  return g;
}

// Even levels walk the lower side, odd levels the upper side.
ParamGrid two_sided(Range lower, Range upper) {
  ParamGrid g{};
  for (std::size_t k = 0; k < kLevelsPerFamily; ++k) {
    const Range& r = (k % 2 == 0) ? lower : upper;
    g[k] = r.mild + (r.extreme - r.mild) * normalized_severity(k);
  }
  return g;
}

const std::array<ParamGrid, kDistortionTypeCount>& all_grids() {
  static const std::array<ParamGrid, kDistortionTypeCount> grids = {
      two_sided({-0.25, -3.0}, {0.25, 3.0}),  // exposure, EV
      one_sided({0.01, 0.35}),                // noise sigma
      one_sided({0.5, 8.0}),                  // blur sigma
      two_sided({0.9, 0.15}, {1.2, 2.5}),     // contrast gain
      two_sided({0.9, 0.0}, {1.3, 2.2}),      // chroma gain
      one_sided({60.0, 2.0}),                 // DCT quality factor
  };
  return grids;
}

// Mirror about the edge samples without repeating them: -1 -> 1, n -> n-2.
std::size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - m);
}

constexpr std::array<double, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// Orthonormal 8-point DCT-II basis, basis[u][x].
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        b[u][x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
    return b;
  }();
  return basis;
}

void dct8x8(const double* in, double* out) {
  const auto& b = dct_basis();
  double tmp[64];
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += b[u][x] * in[y * 8 + x];
      tmp[y * 8 + u] = s;
    }
  }
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += b[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = s;
    }
  }
}

void idct8x8(const double* in, double* out) {
  const auto& b = dct_basis();
  double tmp[64];
  for (int v = 0; v < 8; ++v) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += b[u][x] * in[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += b[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = s;
    }
  }
}

ImageBuffer map_pixels(const ImageBuffer& image, auto&& fn) {
  ImageBuffer out = image;
  for (double& v : out.data()) v = fn(v);
  out.clamp();
  return out;
}

ImageBuffer add_noise(const ImageBuffer& image, double sigma, std::uint64_t key) {
  ImageBuffer out = image;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += sigma * counter_normal(key, i);
  out.clamp();
  return out;
}

ImageBuffer scale_chroma(const ImageBuffer& image, double gain) {
  ImageBuffer out = image;
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      YCbCr ycc = rgb_to_ycbcr(image.at(r, c, 0), image.at(r, c, 1), image.at(r, c, 2));
      ycc.cb *= gain;
      ycc.cr *= gain;
      ycbcr_to_rgb(ycc, out.at(r, c, 0), out.at(r, c, 1), out.at(r, c, 2));
    }
  }
  out.clamp();
  return out;
}

}  // namespace

double normalized_severity(std::size_t level) {
  return static_cast<double>(level) / static_cast<double>(kLevelsPerFamily - 1);
}

const ParamGrid& param_grid(DistortionType type) { return all_grids().at(index_of(type)); }

DistortionSpec DistortionSpec::at_level(DistortionType type, std::size_t level,
                                        std::uint64_t seed) {
  if (level >= kLevelsPerFamily) throw Error("level index out of range 0..19");
  return {type, level, param_grid(type)[level], seed};
}

std::uint64_t noise_key(std::uint64_t seed, std::string_view image_id, DistortionType type) {
  const std::uint64_t k = mix_keys(seed, fnv1a64(image_id));
  return mix_keys(k, static_cast<std::uint64_t>(index_of(type)));
}

ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma) {
  if (!(sigma > 0)) return image;
  const long radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0;
  for (long i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const auto h = static_cast<long>(image.height());
  const auto w = static_cast<long>(image.width());
  ImageBuffer tmp(image.height(), image.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double s = 0;
        for (long k = -radius; k <= radius; ++k) {
          s += kernel[static_cast<std::size_t>(k + radius)] *
               image.at(static_cast<std::size_t>(r), reflect_index(c + k, w), ch);
        }
        tmp.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) = s;
      }
    }
  }
  ImageBuffer out(image.height(), image.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double s = 0;
        for (long k = -radius; k <= radius; ++k) {
          s += kernel[static_cast<std::size_t>(k + radius)] *
               tmp.at(reflect_index(r + k, h), static_cast<std::size_t>(c), ch);
        }
        out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) = s;
      }
    }
  }
  out.clamp();
  return out;
}

std::array<double, 64> scaled_quant_table(double quality_factor) {
  const double q = std::clamp(quality_factor, 1.0, 100.0);
  const double scale = q < 50.0 ? 5000.0 / q : 200.0 - 2.0 * q;
  std::array<double, 64> table{};
  for (std::size_t i = 0; i < 64; ++i) {
    table[i] = std::clamp(std::floor((kLuminanceTable[i] * scale + 50.0) / 100.0), 1.0, 255.0);
  }
  return table;
}

ImageBuffer jpeg_like_compress(const ImageBuffer& image, double quality_factor) {
  const auto table = scaled_quant_table(quality_factor);
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  ImageBuffer out(h, w);
  double block[64];
  double coef[64];
  double recon[64];
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t by = 0; by < h; by += 8) {
      for (std::size_t bx = 0; bx < w; bx += 8) {
        // Edge blocks replicate the last row/column.
        for (std::size_t y = 0; y < 8; ++y) {
          for (std::size_t x = 0; x < 8; ++x) {
            const std::size_t r = std::min(by + y, h - 1);
            const std::size_t c = std::min(bx + x, w - 1);
            block[y * 8 + x] = image.at(r, c, ch) * 255.0 - 128.0;
          }
        }
        dct8x8(block, coef);
        for (std::size_t i = 0; i < 64; ++i) coef[i] = std::round(coef[i] / table[i]) * table[i];
        idct8x8(coef, recon);
        for (std::size_t y = 0; y < 8 && by + y < h; ++y) {
          for (std::size_t x = 0; x < 8 && bx + x < w; ++x) {
            out.at(by + y, bx + x, ch) = (recon[y * 8 + x] + 128.0) / 255.0;
          }
        }
      }
    }
  }
  out.clamp();
  return out;
}

ImageBuffer apply_family(const ImageBuffer& image, DistortionType type, double parameter,
                         std::uint64_t key) {
  if (image.empty()) throw Error("apply_distortion: zero-sized image");
  switch (type) {
    case DistortionType::Exposure: {
      const double gain = std::exp2(parameter);
      return map_pixels(image, [gain](double v) { return v * gain; });
    }
    case DistortionType::Noise:
      return add_noise(image, parameter, key);
    case DistortionType::Blur:
      return gaussian_blur(image, parameter);
    case DistortionType::Contrast:
      return map_pixels(image, [parameter](double v) { return (v - 0.5) * parameter + 0.5; });
    case DistortionType::Colorfulness:
      return scale_chroma(image, parameter);
    case DistortionType::Compression:
      return jpeg_like_compress(image, parameter);
  }
  throw Error("unknown distortion type");
}

ImageBuffer apply_distortion(const ImageBuffer& image, const DistortionSpec& spec,
                             std::string_view image_id) {
  if (spec.level_index >= kLevelsPerFamily) throw Error("level index out of range 0..19");
  if (param_grid(spec.type)[spec.level_index] != spec.parameter) {
    throw Error("parameter " + std::to_string(spec.parameter) + " is not on the " +
                std::string(to_string(spec.type)) + " grid at level " +
                std::to_string(spec.level_index));
  }
  return apply_family(image, spec.type, spec.parameter,
                      noise_key(spec.seed, image_id, spec.type));
}

}  // namespace roiqa
