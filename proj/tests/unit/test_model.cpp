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


#include "roiqa/model.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "roiqa/nn/optim.hpp"
#include "test_util.hpp"

namespace roiqa {
namespace {

using nn::Graph;
using Var = Graph::Var;

ModelConfig tiny(std::size_t S = 64) {
  ModelConfig c;
  c.input_size = S;
  c.token_dim = 8;
  c.channels = {4, 6, 8, 8};
  c.local_channels = 4;
  c.local_size = 16;
  c.head_hidden = 8;
  return c;
}

std::vector<double> vals(const Graph& g, Var v) { return {g.value(v).begin(), g.value(v).end()}; }

struct Fixture {
  ModelConfig config = tiny();
  MfeModel model{config, 7};
  Rng rng{81};
  ImageBuffer image = testing::random_image(rng, 64, 64);
};

TEST(Model, FeatureShapes) {
  Fixture f;
  Graph g(false);
  const auto feats = f.model.encode(g, g.constant({3, 64, 64}, prepare_image(f.image, 64)));
  const std::size_t sides[] = {16, 8, 4, 2};
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    EXPECT_EQ(g.shape(feats[j]), (nn::Shape{f.config.channels[j], sides[j], sides[j]})) << j;
  }
  EXPECT_THROW(f.model.encode(g, g.constant({3, 32, 32}, std::vector<double>(3 * 32 * 32))), Error);
}

TEST(Model, ForwardShapesAndZeroInputFinite) {
  Fixture f;
  const auto mask = testing::rect_mask(64, 64, 10, 10, 40, 40);
  for (const ImageBuffer& img : {f.image, ImageBuffer(64, 64, 0.0)}) {
    const TaskLogits t = f.model.forward(img, mask);
    EXPECT_EQ(t.quality.size(), 5u);
    EXPECT_EQ(t.importance.size(), 5u);
    EXPECT_EQ(t.presence.size(), 6u);
    EXPECT_EQ(t.severity.size(), 30u);
    EXPECT_EQ(t.judgment.size(), 2u);
    for (const auto* v : {&t.quality, &t.importance, &t.presence, &t.severity, &t.judgment})
      for (double x : *v) EXPECT_TRUE(std::isfinite(x));
  }
  EXPECT_THROW(f.model.forward(f.image, RegionMask(32, 32, true)), Error);
}

TEST(Model, BasicTokenIsAffineMapOfOracleMaskPool) {
  Fixture f;
  Graph g(false);
  const auto feats = f.model.encode(g, g.constant({3, 64, 64}, prepare_image(f.image, 64)));
  for (int trial = 0; trial < 20; ++trial) {
    const RegionMask mask = testing::random_mask(f.rng, 64, 64, f.rng.uniform(0.01, 0.5));
    const auto basic = f.model.basic_tokens(g, feats, mask);
    for (std::size_t j = 0; j < kEncoderLevels; ++j) {
      const auto& s = g.shape(feats[j]);
      const auto pooled = oracle::mask_pool(g.value(feats[j]), s[0], s[1], s[2], mask);
      const std::string n = "mfe.basic" + std::to_string(j + 1);
      const auto w = f.model.params().at(n + ".w").value();
      const auto b = f.model.params().at(n + ".b").value();
      const std::size_t P = f.config.token_dim;
      for (std::size_t o = 0; o < P; ++o) {
        double want = b[o];
        for (std::size_t c = 0; c < s[0]; ++c) want += w[o * s[0] + c] * pooled[c];
        ASSERT_NEAR(g.value(basic[j])[o], want, 1e-12) << "level " << j;
      }
    }
  }
  EXPECT_THROW(f.model.basic_tokens(g, feats, RegionMask(64, 64, false)), Error);
}

// Disjoint masks of equal area: pooling is coverage-weighted, so the union
// token is the mean of the two.
TEST(Model, BasicTokenOfEqualAreaUnionIsMidpoint) {
  Fixture f;
  Graph g(false);
  const auto feats = f.model.encode(g, g.constant({3, 64, 64}, prepare_image(f.image, 64)));
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 3 + f.rng.index(20), w = 3 + f.rng.index(20);
    const std::size_t r0 = f.rng.index(64 - h + 1), c0 = f.rng.index(32 - w + 1);
    const std::size_t r1 = f.rng.index(64 - h + 1), c1 = 32 + f.rng.index(32 - w + 1);
    const RegionMask a = testing::rect_mask(64, 64, r0, c0, r0 + h, c0 + w);
    const RegionMask b = testing::rect_mask(64, 64, r1, c1, r1 + h, c1 + w);
    RegionMask u = a;
    for (std::size_t r = 0; r < 64; ++r)
      for (std::size_t c = 0; c < 64; ++c)
        if (b.at(r, c)) u.set(r, c, true);
    const auto ta = f.model.basic_tokens(g, feats, a), tb = f.model.basic_tokens(g, feats, b),
               tu = f.model.basic_tokens(g, feats, u);
    for (std::size_t j = 0; j < kEncoderLevels; ++j)
      for (std::size_t o = 0; o < f.config.token_dim; ++o)
        ASSERT_NEAR(g.value(tu[j])[o], 0.5 * (g.value(ta[j])[o] + g.value(tb[j])[o]), 1e-12);
  }
}

TEST(Model, GlobalAttentionSingleKeyIsProjectedFeature) {
  // At S = 32 the last level is 1 x 1, so there is exactly one key.
  const ModelConfig c = tiny(32);
  MfeModel m(c, 3);
  Rng rng(82);
  Graph g(false);
  const auto feats = m.encode(g, g.constant({3, 32, 32}, testing::random_vector(rng, 3 * 32 * 32, 0, 1)));
  ASSERT_EQ(g.shape(feats[3]), (nn::Shape{8, 1, 1}));
  const Var basic = g.constant({1, 8}, testing::random_vector(rng, 8));
  const Var out = m.global_attention(g, 3, basic, feats[3]);
  const auto w = m.params().at("mfe.proj4.w").value();
  const auto b = m.params().at("mfe.proj4.b").value();
  for (std::size_t o = 0; o < 8; ++o) {
    double want = b[o];
    for (std::size_t ch = 0; ch < 8; ++ch) want += w[o * 8 + ch] * g.value(feats[3])[ch];
    EXPECT_NEAR(g.value(out)[o], want, 1e-12);
  }
}

TEST(Model, GlobalAttentionUniformKeysReturnBias) {
  Fixture f;
  nn::fill(f.model.params().at("mfe.proj1.w"), 0.0);
  auto bias = f.model.params().at("mfe.proj1.b").value();
  for (double& v : bias) v = f.rng.uniform(-1, 1);
  Graph g(false);
  const auto feats = f.model.encode(g, g.constant({3, 64, 64}, prepare_image(f.image, 64)));
  const Var basic = g.constant({1, 8}, testing::random_vector(f.rng, 8));
  const Var out = f.model.global_attention(g, 0, basic, feats[0]);
  for (std::size_t o = 0; o < 8; ++o) EXPECT_NEAR(g.value(out)[o], bias[o], 1e-12);
}

TEST(Model, FuseGlobalIsAffine) {
  Fixture f;
  for (int trial = 0; trial < 10; ++trial) {
    Graph g(false);
    std::array<Var, 4> b1, g1, b2, g2, bm, gm;
    const double lambda = f.rng.uniform(-2, 2);
    for (std::size_t j = 0; j < 4; ++j) {
      const auto x1 = testing::random_vector(f.rng, 8), y1 = testing::random_vector(f.rng, 8);
      const auto x2 = testing::random_vector(f.rng, 8), y2 = testing::random_vector(f.rng, 8);
      std::vector<double> xm(8), ym(8);
      for (std::size_t k = 0; k < 8; ++k) {
        xm[k] = lambda * x1[k] + (1 - lambda) * x2[k];
        ym[k] = lambda * y1[k] + (1 - lambda) * y2[k];
      }
      b1[j] = g.constant({1, 8}, x1);
      g1[j] = g.constant({1, 8}, y1);
      b2[j] = g.constant({1, 8}, x2);
      g2[j] = g.constant({1, 8}, y2);
      bm[j] = g.constant({1, 8}, xm);
      gm[j] = g.constant({1, 8}, ym);
    }
    const auto o1 = vals(g, f.model.fuse_global(g, b1, g1)), o2 = vals(g, f.model.fuse_global(g, b2, g2)),
               om = vals(g, f.model.fuse_global(g, bm, gm));
    for (std::size_t k = 0; k < 8; ++k) ASSERT_NEAR(om[k], lambda * o1[k] + (1 - lambda) * o2[k], 1e-11);
  }
}

// The local view sees a tight crop, so moving the object (and its mask)
// leaves the local token unchanged.
TEST(Model, LocalTokenIsTranslationInvariant) {
  Fixture f;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t h = 8 + f.rng.index(12), w = 8 + f.rng.index(12);
    const std::size_t r0 = f.rng.index(64 - h), c0 = f.rng.index(64 - w);
    const std::size_t r1 = f.rng.index(64 - h), c1 = f.rng.index(64 - w);
    const ImageBuffer obj = testing::random_image(f.rng, h, w);
    ImageBuffer a(64, 64, 0.3), b(64, 64, 0.8);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c)
        for (std::size_t ch = 0; ch < 3; ++ch) {
          a.at(r0 + r, c0 + c, ch) = obj.at(r, c, ch);
          b.at(r1 + r, c1 + c, ch) = obj.at(r, c, ch);
        }
    const auto ma = testing::rect_mask(64, 64, r0, c0, r0 + h, c0 + w);
    const auto mb = testing::rect_mask(64, 64, r1, c1, r1 + h, c1 + w);
    const auto pa = prepare_patch(a, ma, 16), pb = prepare_patch(b, mb, 16);
    ASSERT_EQ(pa, pb);
    Graph g(false);
    const auto ta = vals(g, f.model.local_token(g, g.constant({3, 16, 16}, pa)));
    const auto tb = vals(g, f.model.local_token(g, g.constant({3, 16, 16}, pb)));
    EXPECT_EQ(ta, tb);
  }
}

TEST(Model, AblationSwitchesZeroTokensAndChangeLogits) {
  const auto mask = testing::rect_mask(64, 64, 5, 5, 30, 50);
  Rng rng(83);
  const ImageBuffer img = testing::random_image(rng, 64, 64);
  ModelConfig full = tiny(), no_global = tiny(), no_local = tiny();
  no_global.use_global = false;
  no_local.use_local = false;
  const MfeModel mf(full, 5), mg(no_global, 5), ml(no_local, 5);
  for (const MfeModel* m : {&mg, &ml}) {
    Graph g(false);
    const auto feats = m->encode(g, g.constant({3, 64, 64}, prepare_image(img, 64)));
    const auto t = m->tokens(g, feats, g.constant({3, 16, 16}, prepare_patch(img, mask, 16)), mask);
    const Var off = m == &mg ? t.global : t.local;
    const Var on = m == &mg ? t.local : t.global;
    for (double v : g.value(off)) EXPECT_EQ(v, 0.0);
    double mag = 0;
    for (double v : g.value(on)) mag += std::abs(v);
    EXPECT_GT(mag, 0.0);
  }
  const auto a = mf.forward(img, mask).quality, b = mg.forward(img, mask).quality,
             c = ml.forward(img, mask).quality;
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
}

TEST(Model, HeadsDependOnTaskQuery) {
  Fixture f;
  Graph g(false);
  const auto mask = testing::rect_mask(64, 64, 0, 0, 32, 32);
  const auto feats = f.model.encode(g, g.constant({3, 64, 64}, prepare_image(f.image, 64)));
  const auto t = f.model.tokens(g, feats, g.constant({3, 16, 16}, prepare_patch(f.image, mask, 16)), mask);
  const auto a = vals(g, f.model.head(g, t, Head::Judgment, {InstructionKind::JirQuality, 1}));
  const auto b = vals(g, f.model.head(g, t, Head::Judgment, {InstructionKind::JirQuality, 2}));
  const auto c = vals(g, f.model.head(g, t, Head::Judgment, {InstructionKind::JirDistortion, 1}));
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(g.shape(f.model.head(g, t, Head::Severity, {InstructionKind::AirDistortion, 0})), (nn::Shape{6, 5}));
}

TEST(Model, QuerySlotsAreDistinct) {
  std::set<std::size_t> seen;
  for (std::size_t l = 0; l < 5; ++l) {
    seen.insert(query_slot({InstructionKind::JirQuality, l}));
    seen.insert(query_slot({InstructionKind::JirImportance, l}));
  }
  for (std::size_t d = 0; d <= kCleanQuery; ++d) seen.insert(query_slot({InstructionKind::JirDistortion, d}));
  EXPECT_EQ(seen.size(), kQuerySlots);
  EXPECT_LT(*seen.rbegin(), kQuerySlots);
}

TEST(Model, GradientsMatchFiniteDifferences) {
  Fixture f;
  const auto mask = testing::rect_mask(64, 64, 12, 8, 44, 40);
  const auto input = prepare_image(f.image, 64);
  const auto patch = prepare_patch(f.image, mask, 16);
  const auto loss = [&](Graph& g) {
    const auto feats = f.model.encode(g, g.constant({3, 64, 64}, input));
    const auto t = f.model.tokens(g, feats, g.constant({3, 16, 16}, patch), mask);
    const std::array<Var, 3> terms{
        g.cross_entropy(f.model.head(g, t, Head::Quality, {InstructionKind::AirQuality, 0}), 0, 3),
        g.cross_entropy(f.model.head(g, t, Head::Severity, {InstructionKind::AirDistortion, 0}), 2, 1),
        g.cross_entropy(f.model.head(g, t, Head::Judgment, {InstructionKind::JirDistortion, 4}), 0, 1)};
    return g.add_n(terms);
  };
  nn::GradCheckOptions opt;
  opt.max_elements_per_param = 4;
  EXPECT_LT(nn::grad_check_directional(loss, f.model.params(), 16, opt).max_rel_error, 1e-5);
  const auto r = nn::grad_check(loss, f.model.params(), opt);
  EXPECT_GT(r.checked, 100u);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(Model, SaveLoadReproducesForwardBitwise) {
  Fixture f;
  testing::TempDir dir("model");
  f.model.save(dir.path() / "m");
  const MfeModel back = MfeModel::load(dir.path() / "m");
  EXPECT_EQ(back.config(), f.config);
  const auto mask = testing::rect_mask(64, 64, 3, 3, 20, 60);
  const auto a = f.model.forward(f.image, mask), b = back.forward(f.image, mask);
  ASSERT_EQ(a.severity.size(), b.severity.size());
  for (std::size_t i = 0; i < a.severity.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.severity[i]), std::bit_cast<std::uint64_t>(b.severity[i]));
  EXPECT_EQ(a.quality, b.quality);
}

TEST(Model, SeedDeterminesParameters) {
  const MfeModel a(tiny(), 9), b(tiny(), 9), c(tiny(), 10);
  EXPECT_EQ(nn::serialize_checkpoint(a.params()), nn::serialize_checkpoint(b.params()));
  EXPECT_NE(nn::serialize_checkpoint(a.params()), nn::serialize_checkpoint(c.params()));
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  ModelConfig c = tiny(96);
  c.use_local = false;
  EXPECT_EQ(parse_model_config(model_config_to_json(c)), c);
  EXPECT_EQ(parse_model_config("{}"), ModelConfig{});
  EXPECT_EQ(parse_model_config(R"({"token_dim": 12})").token_dim, 12u);
  EXPECT_THROW(parse_model_config(R"({"input_size": 48})"), Error);
  EXPECT_THROW(parse_model_config(R"({"local_size": 6})"), Error);
  EXPECT_THROW(parse_model_config(R"({"channels": [1, 2, 0, 4]})"), Error);
  EXPECT_THROW(parse_model_config(R"({"dropout": 0.1})"), Error);
  EXPECT_THROW(parse_model_config("[1]"), Error);
}

TEST(Prepare, ImageAndPatchLayout) {
  ImageBuffer img(4, 4, 0.0);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      img.at(r, c, 0) = 0.1;
      img.at(r, c, 1) = 0.5;
      img.at(r, c, 2) = 0.9;
    }
  const auto x = prepare_image(img, 8);
  ASSERT_EQ(x.size(), 3u * 64);
  EXPECT_NEAR(x[0], 0.1, 1e-15);
  EXPECT_NEAR(x[64], 0.5, 1e-15);
  EXPECT_NEAR(x[128 + 63], 0.9, 1e-15);
  // Background outside the mask is zeroed inside the crop.
  RegionMask diag(4, 4, false);
  diag.set(0, 0, true);
  diag.set(3, 3, true);
  const auto p = prepare_patch(img, diag, 4);
  EXPECT_NEAR(p[0], 0.1, 1e-15);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[15], 0.1, 1e-15);
}

}  // namespace
}  // namespace roiqa
