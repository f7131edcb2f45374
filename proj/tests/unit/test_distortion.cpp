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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "roiqa/distortion.hpp"
#include "roiqa/fr_oracle.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/records.hpp"
#include "roiqa/scene.hpp"
#include "test_util.hpp"

namespace roiqa {
namespace {

namespace fs = std::filesystem;

bool one_sided(DistortionType t) {
  return t == DistortionType::Noise || t == DistortionType::Blur || t == DistortionType::Compression;
}

double identity_of(DistortionType t) {
  switch (t) {
    case DistortionType::Contrast:
    case DistortionType::Colorfulness:
      return 1.0;
    default:
      return 0.0;
  }
}

TEST(ParamGrid, TwentyValuesWithinDeclaredRanges) {
  struct Range {
    DistortionType t;
    double lo, hi;
  };
  for (const Range& r : {Range{DistortionType::Noise, 0.01, 0.35}, Range{DistortionType::Blur, 0.5, 8.0},
                         Range{DistortionType::Compression, 2.0, 60.0}}) {
    const auto& g = param_grid(r.t);
    EXPECT_EQ(g.size(), 20u);
    EXPECT_DOUBLE_EQ(std::min(g.front(), g.back()), r.lo);
    EXPECT_DOUBLE_EQ(std::max(g.front(), g.back()), r.hi);
  }
  for (double ev : param_grid(DistortionType::Exposure)) {
    EXPECT_GE(std::abs(ev), 0.25);
    EXPECT_LE(std::abs(ev), 3.0);
  }
  for (double c : param_grid(DistortionType::Contrast)) {
    EXPECT_TRUE((c >= 0.15 && c <= 0.9) || (c >= 1.2 && c <= 2.5)) << c;
  }
  for (double c : param_grid(DistortionType::Colorfulness)) {
    EXPECT_TRUE((c >= 0.0 && c <= 0.9) || (c >= 1.3 && c <= 2.2)) << c;
  }
}

TEST(ParamGrid, NoiseStrictlyIncreasingBlurEndpoints) {
  const auto& n = param_grid(DistortionType::Noise);
  for (std::size_t i = 1; i < n.size(); ++i) EXPECT_LT(n[i - 1], n[i]);
  EXPECT_LT(param_grid(DistortionType::Blur)[0], param_grid(DistortionType::Blur)[19]);
  EXPECT_EQ(&param_grid(DistortionType::Noise), &param_grid(DistortionType::Noise));
  EXPECT_EQ(param_grid(DistortionType::Blur), param_grid(DistortionType::Blur));
}

TEST(ParamGrid, SeverityGrowsWithLevelOnEachSide) {
  for (DistortionType t : kAllDistortionTypes) {
    const auto& g = param_grid(t);
    const double id = identity_of(t);
    if (one_sided(t)) {
      for (std::size_t i = 1; i < 20; ++i) EXPECT_GT(std::abs(g[i] - g[0]), std::abs(g[i - 1] - g[0]));
      continue;
    }
    // Two-sided families alternate sides; deviation grows along each side.
    for (std::size_t i = 2; i < 20; ++i) {
      EXPECT_GT(std::abs(g[i] - id), std::abs(g[i - 2] - id)) << to_string(t) << " " << i;
      EXPECT_EQ(g[i] < id, g[i - 2] < id);
    }
  }
}

TEST(ApplyDistortion, IdentityParameters) {
  Rng rng(10);
  const ImageBuffer img = testing::random_image(rng, 32, 40);
  EXPECT_EQ(apply_family(img, DistortionType::Exposure, 0.0), img);
  EXPECT_EQ(apply_family(img, DistortionType::Contrast, 1.0), img);
}

TEST(ApplyDistortion, NoiseIsDeterministicAndKeyed) {
  Rng rng(11);
  const ImageBuffer img = testing::random_image(rng, 32, 32);
  const auto spec = DistortionSpec::at_level(DistortionType::Noise, 7, 99);
  const ImageBuffer a = apply_distortion(img, spec, "abc");
  EXPECT_EQ(a, apply_distortion(img, spec, "abc"));
  EXPECT_NE(a, apply_distortion(img, spec, "abd"));
  EXPECT_NE(a, apply_distortion(img, DistortionSpec::at_level(DistortionType::Noise, 7, 100), "abc"));
}

TEST(ApplyDistortion, RejectsOffGridParameter) {
  const ImageBuffer img(32, 32, 0.5);
  DistortionSpec spec = DistortionSpec::at_level(DistortionType::Blur, 3, 0);
  spec.parameter += 1e-3;
  EXPECT_THROW(apply_distortion(img, spec), Error);
  EXPECT_THROW(apply_family(ImageBuffer(), DistortionType::Blur, 1.0), Error);
}

TEST(ApplyDistortion, OutputsFiniteAndInRange) {
  Rng rng(12);
  const ImageBuffer img = testing::random_image(rng, 33, 35);
  for (DistortionType t : kAllDistortionTypes) {
    for (std::size_t level : {0u, 9u, 18u, 19u}) {
      const ImageBuffer out = apply_distortion(img, DistortionSpec::at_level(t, level, 1), "x");
      ASSERT_EQ(out.height(), img.height());
      ASSERT_EQ(out.width(), img.width());
      for (double v : out.data()) {
        ASSERT_TRUE(std::isfinite(v));
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
    }
  }
}

TEST(ApplyDistortion, ClosedFormFamilies) {
  Rng rng(13);
  const ImageBuffer img = testing::random_image(rng, 32, 32);
  const ImageBuffer ex = apply_family(img, DistortionType::Exposure, -1.0);
  const ImageBuffer co = apply_family(img, DistortionType::Contrast, 0.5);
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    EXPECT_NEAR(ex.data()[i], img.data()[i] * 0.5, 1e-15);
    EXPECT_NEAR(co.data()[i], (img.data()[i] - 0.5) * 0.5 + 0.5, 1e-15);
  }
  const ImageBuffer gray = apply_family(img, DistortionType::Colorfulness, 0.0);
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) {
      EXPECT_NEAR(gray.at(r, c, 0), gray.at(r, c, 1), 1e-12);
      EXPECT_NEAR(gray.at(r, c, 1), gray.at(r, c, 2), 1e-12);
    }
  }
}

TEST(ApplyDistortion, BlurPreservesConstantAndSmooths) {
  const ImageBuffer flat(32, 32, 0.25);
  for (double v : gaussian_blur(flat, 3.0).data()) EXPECT_NEAR(v, 0.25, 1e-12);
  Rng rng(14);
  const ImageBuffer img = testing::random_image(rng, 32, 32);
  auto variance = [](const ImageBuffer& im) {
    double m = 0, s = 0;
    for (double v : im.data()) m += v;
    m /= static_cast<double>(im.data().size());
    for (double v : im.data()) s += (v - m) * (v - m);
    return s;
  };
  EXPECT_LT(variance(gaussian_blur(img, 2.0)), variance(gaussian_blur(img, 0.5)));
}

// Direct orthonormal 8x8 DCT round trip with the scaled table.
ImageBuffer reference_compress(const ImageBuffer& img, double q) {
  const auto table = scaled_quant_table(q);
  auto a = [](std::size_t u) { return u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0); };
  auto basis = [](std::size_t x, std::size_t u) { return std::cos((2.0 * x + 1.0) * u * std::numbers::pi / 16.0); };
  ImageBuffer out(img.height(), img.width());
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t by = 0; by < img.height(); by += 8) {
      for (std::size_t bx = 0; bx < img.width(); bx += 8) {
        double coef[64];
        for (std::size_t u = 0; u < 8; ++u) {
          for (std::size_t v = 0; v < 8; ++v) {
            double s = 0;
            for (std::size_t y = 0; y < 8; ++y) {
              for (std::size_t x = 0; x < 8; ++x) {
                const std::size_t r = std::min(by + y, img.height() - 1), c = std::min(bx + x, img.width() - 1);
                s += (img.at(r, c, ch) * 255.0 - 128.0) * basis(y, u) * basis(x, v);
              }
            }
            const double f = a(u) * a(v) * s;
            coef[u * 8 + v] = std::round(f / table[u * 8 + v]) * table[u * 8 + v];
          }
        }
        for (std::size_t y = 0; y < 8 && by + y < img.height(); ++y) {
          for (std::size_t x = 0; x < 8 && bx + x < img.width(); ++x) {
            double s = 0;
            for (std::size_t u = 0; u < 8; ++u) {
              for (std::size_t v = 0; v < 8; ++v) s += a(u) * a(v) * coef[u * 8 + v] * basis(y, u) * basis(x, v);
            }
            out.at(by + y, bx + x, ch) = (s + 128.0) / 255.0;
          }
        }
      }
    }
  }
  out.clamp();
  return out;
}

TEST(Compression, MatchesDirectDctOracle) {
  Rng rng(15);
  const ImageBuffer img = testing::random_image(rng, 20, 27);
  for (double q : {60.0, 17.0, 2.0}) {
    const ImageBuffer got = jpeg_like_compress(img, q);
    const ImageBuffer want = reference_compress(img, q);
    for (std::size_t i = 0; i < got.data().size(); ++i) ASSERT_NEAR(got.data()[i], want.data()[i], 1e-9) << q;
  }
}

TEST(Compression, MildestLevelKeepsConstantColor) {
  ImageBuffer img(32, 32);
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) {
      img.at(r, c, 0) = 0.8;
      img.at(r, c, 1) = 0.35;
      img.at(r, c, 2) = 0.1;
    }
  }
  const double q = param_grid(DistortionType::Compression)[0];
  EXPECT_EQ(q, 60.0);
  const ImageBuffer out = apply_distortion(img, DistortionSpec::at_level(DistortionType::Compression, 0, 0));
  const ImageBuffer ref = reference_compress(img, q);
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    EXPECT_LE(std::abs(out.data()[i] - img.data()[i]), 1.0 / 255.0);
    EXPECT_NEAR(out.data()[i], ref.data()[i], 1e-9);
  }
}

TEST(Compression, StandardTableAtFifty) {
  const auto t = scaled_quant_table(50.0);
  EXPECT_EQ(t[0], 16.0);
  EXPECT_EQ(t[1], 11.0);
  EXPECT_EQ(t[63], 99.0);
}

// Frozen regression constants: mildest level of every family on the gray card.
TEST(Distortion, MildestLevelsOnGrayCardKeepHighFidelity) {
  const ImageBuffer card = gray_card();
  const std::array<double, 6> frozen = {0.98517490474531677, 0.96184010300630507, 1.0,
                                        1.0, 1.0, 0.99999234227049483};
  for (DistortionType t : kAllDistortionTypes) {
    const double s = fr_score(apply_distortion(card, DistortionSpec::at_level(t, 0, 0), "card"), card);
    EXPECT_GE(s, 0.9) << to_string(t);
    EXPECT_NEAR(s, frozen[index_of(t)], 1e-12) << to_string(t);
  }
}

TEST(SynthDataset, CountsDeterminismAndOrderIndependence) {
  testing::TempDir dir("synth");
  fs::create_directories(dir / "refs");
  for (int i = 0; i < 3; ++i) write_png(dir / ("refs/r" + std::to_string(i) + ".png"), procedural_scene(40 + i, 48, 48));
  SynthOptions opts;
  opts.families = {DistortionType::Blur, DistortionType::Noise};
  opts.seed = 5;
  const DatasetManifest m = synth_dataset(dir / "refs", dir / "a", opts);
  EXPECT_EQ(m.records.size(), 120u);
  std::size_t pngs = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a/dist")) pngs += e.path().extension() == ".png";
  EXPECT_EQ(pngs, 120u);
  opts.jobs = 3;
  synth_dataset(dir / "refs", dir / "b", opts);
  EXPECT_EQ(testing::snapshot_tree(dir / "a"), testing::snapshot_tree(dir / "b"));
  for (const auto& e : m.records) {
    EXPECT_EQ(e.parameter_value, param_grid(e.distortion_type)[static_cast<std::size_t>(e.parameter_index)]);
    EXPECT_EQ(e.image_id, sha256_hex(read_bytes(dir / "a" / e.reference_path)));
  }
}

TEST(SynthDataset, SubsetOfLevels) {
  testing::TempDir dir("synth_levels");
  fs::create_directories(dir / "refs");
  write_png(dir / "refs/r.png", procedural_scene(3, 32, 32));
  SynthOptions opts;
  opts.families = {DistortionType::Exposure};
  opts.levels = {0, 19};
  EXPECT_EQ(synth_dataset(dir / "refs", dir / "o", opts).records.size(), 2u);
}

TEST(SynthDataset, EmptyReferenceDirectoryFails) {
  testing::TempDir dir("synth_empty");
  fs::create_directories(dir / "refs");
  SynthOptions opts;
  opts.families = {DistortionType::Noise};
  EXPECT_THROW(synth_dataset(dir / "refs", dir / "o", opts), Error);
  EXPECT_THROW(synth_dataset(dir / "missing", dir / "o", opts), Error);
}

}  // namespace
}  // namespace roiqa
