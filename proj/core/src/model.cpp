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

#include <set>

#include "json_util.hpp"
#include "roiqa/image_ops.hpp"
#include "roiqa/mask.hpp"
#include "roiqa/nn/optim.hpp"
#include "roiqa/random.hpp"
#include "roiqa/records.hpp"

namespace roiqa {

using detail::Json;
using nn::Graph;
using nn::Padding;
using Var = nn::Graph::Var;

namespace {

std::string level_name(const char* stem, std::size_t j) {
  return std::string(stem) + std::to_string(j + 1);
}

constexpr std::array<const char*, 5> kHeadNames = {"quality", "importance", "presence",
                                                   "severity", "judgment"};
constexpr std::array<std::size_t, 5> kHeadWidths = {kLevelCount, kLevelCount, kDistortionTypeCount,
                                                    kDistortionTypeCount * kLevelCount, 2};

}  // namespace

void ModelConfig::validate() const {
  if (input_size == 0 || input_size % 32 != 0) {
    throw Error("model config: input_size must be a positive multiple of 32, got " +
                std::to_string(input_size));
  }
  if (token_dim == 0) throw Error("model config: token_dim must be positive");
  for (std::size_t c : channels)
    if (c == 0) throw Error("model config: channel widths must be positive");
  if (local_channels == 0) throw Error("model config: local_channels must be positive");
  if (local_size == 0 || local_size % 4 != 0) {
    throw Error("model config: local_size must be a positive multiple of 4");
  }
  if (head_hidden == 0) throw Error("model config: head_hidden must be positive");
}

std::string model_config_to_json(const ModelConfig& c) {
  Json j;
  j["input_size"] = c.input_size;
  j["token_dim"] = c.token_dim;
  j["channels"] = c.channels;
  j["local_channels"] = c.local_channels;
  j["local_size"] = c.local_size;
  j["head_hidden"] = c.head_hidden;
  j["use_global"] = c.use_global;
  j["use_local"] = c.use_local;
  return j.dump(2) + "\n";
}

ModelConfig parse_model_config(std::string_view text) {
  const Json j = detail::parse_json(text, "model config");
  if (!j.is_object()) throw Error("model config: expected a JSON object");
  static const std::set<std::string> known = {"input_size",   "token_dim",  "channels",
                                              "local_channels", "local_size", "head_hidden",
                                              "use_global",   "use_local"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error("model config: unknown key '" + key + "'");
  }
  ModelConfig c;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = detail::require<std::decay_t<decltype(field)>>(j, key, "model config");
  };
  opt("input_size", c.input_size);
  opt("token_dim", c.token_dim);
  if (j.contains("channels")) {
    const auto v = detail::require<std::vector<std::size_t>>(j, "channels", "model config");
    if (v.size() != kEncoderLevels) throw Error("model config: channels must list 4 widths");
    std::copy(v.begin(), v.end(), c.channels.begin());
  }
  opt("local_channels", c.local_channels);
  opt("local_size", c.local_size);
  opt("head_hidden", c.head_hidden);
  opt("use_global", c.use_global);
  opt("use_local", c.use_local);
  c.validate();
  return c;
}

std::size_t query_slot(const TaskQuery& q) {
  switch (q.kind) {
    case InstructionKind::JirQuality:
      if (q.query < kLevelCount) return q.query;
      break;
    case InstructionKind::JirImportance:
      if (q.query < kLevelCount) return kLevelCount + q.query;
      break;
    case InstructionKind::JirDistortion:
      if (q.query <= kCleanQuery) return 2 * kLevelCount + q.query;
      break;
    default:
      return 0;
  }
  throw Error("task query index " + std::to_string(q.query) + " out of range for " +
              std::string(to_string(q.kind)));
}

std::vector<double> prepare_image(const ImageBuffer& image, std::size_t size) {
  return to_planar(resize_bilinear(image, size, size));
}

std::vector<double> prepare_patch(const ImageBuffer& image, const RegionMask& mask,
                                  std::size_t size) {
  if (mask.popcount() == 0) throw Error("local token: empty mask");
  return to_planar(resize_bilinear(crop_to_min_rect(image, mask).patch, size, size));
}

MfeModel::MfeModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const std::size_t P = config_.token_dim;
  const std::size_t Cl = config_.local_channels;
  const auto& C = config_.channels;

  Rng rng(seed);
  auto weight = [&](std::string name, nn::Shape shape, std::size_t fan_in) {
    nn::he_normal(params_.add(std::move(name), std::move(shape)), fan_in, rng);
  };
  auto zeros = [&](std::string name, std::size_t n) { params_.add(std::move(name), {n}); };
  auto conv = [&](const std::string& name, std::size_t out, std::size_t in) {
    weight(name + ".w", {out, in, 3, 3}, in * 9);
    zeros(name + ".b", out);
  };
  auto dense = [&](const std::string& name, std::size_t out, std::size_t in, bool bias = true) {
    weight(name + ".w", {out, in}, in);
    if (bias) zeros(name + ".b", out);
  };

  conv("enc.stem", C[0], 3);
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    const std::string s = level_name("enc.stage", j);
    conv(s + ".down", C[j], j == 0 ? C[0] : C[j - 1]);
    conv(s + ".conv", C[j], C[j]);
    nn::fill(params_.add(s + ".gamma", {C[j]}), 1.0);
    zeros(s + ".beta", C[j]);
  }
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    dense(level_name("mfe.basic", j), P, C[j]);
    dense(level_name("mfe.sa", j) + ".q", P, P, false);
    dense(level_name("mfe.sa", j) + ".k", P, P, false);
    dense(level_name("mfe.sa", j) + ".v", P, P, false);
    dense(level_name("mfe.proj", j), P, C[j]);
  }
  dense("mfe.fc1", P, 2 * P);
  dense("mfe.fc2", P, P);
  dense("mfe.fc3", P, P);

  conv("local.conv1", Cl, 3);
  conv("local.conv2", Cl, Cl);
  dense("local.sa.q", Cl, Cl, false);
  dense("local.sa.k", Cl, Cl, false);
  dense("local.sa.v", Cl, Cl, false);
  dense("local.fc", P, Cl);

  dense("image.fc", P, C[3]);

  weight("task.kind", {kInstructionKindCount, P}, P);
  weight("task.query", {kQuerySlots, P}, P);
  for (std::size_t h = 0; h < kHeadNames.size(); ++h) {
    const std::string n = std::string("head.") + kHeadNames[h];
    dense(n + ".fc1", config_.head_hidden, 4 * P);
    dense(n + ".fc2", kHeadWidths[h], config_.head_hidden);
  }
}

Var MfeModel::p(Graph& g, std::string_view name) const { return g.param(params_.at(name)); }

std::array<Var, kEncoderLevels> MfeModel::encode(Graph& g, Var input) const {
  const auto& s = g.shape(input);
  if (s != nn::Shape{3, config_.input_size, config_.input_size}) {
    throw Error("encode: expected input 3x" + std::to_string(config_.input_size) + "x" +
                std::to_string(config_.input_size) + ", got " + nn::shape_string(s));
  }
  Var x = g.gelu(g.conv2d(input, p(g, "enc.stem.w"), p(g, "enc.stem.b"), 2, Padding::Zero));
  std::array<Var, kEncoderLevels> feats;
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    const std::string st = level_name("enc.stage", j);
    x = g.conv2d(x, p(g, st + ".down.w"), p(g, st + ".down.b"), 2, Padding::Zero);
    x = g.gelu(x);
    x = g.conv2d(x, p(g, st + ".conv.w"), p(g, st + ".conv.b"), 1, Padding::Zero);
    x = g.channel_affine(x, p(g, st + ".gamma"), p(g, st + ".beta"));
    feats[j] = x;
  }
  return feats;
}

std::array<Var, kEncoderLevels> MfeModel::basic_tokens(
    Graph& g, const std::array<Var, kEncoderLevels>& feats, const RegionMask& mask) const {
  if (mask.popcount() == 0) throw Error("basic tokens: empty mask");
  std::array<Var, kEncoderLevels> out;
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    const auto& s = g.shape(feats[j]);
    const auto cover = coverage_fractions(mask, s[1], s[2]);
    const Var pooled = g.weighted_spatial_mean(feats[j], cover);
    const std::string n = level_name("mfe.basic", j);
    out[j] = g.linear(pooled, p(g, n + ".w"), p(g, n + ".b"));
  }
  return out;
}

Var MfeModel::global_attention(Graph& g, std::size_t level, Var basic, Var feat) const {
  const std::string sa = level_name("mfe.sa", level);
  const Var query = g.attention(g.linear(basic, p(g, sa + ".q.w"), std::nullopt),
                                g.linear(basic, p(g, sa + ".k.w"), std::nullopt),
                                g.linear(basic, p(g, sa + ".v.w"), std::nullopt));
  const std::string pj = level_name("mfe.proj", level);
  const Var keys = g.linear(g.to_tokens(feat), p(g, pj + ".w"), p(g, pj + ".b"));
  return g.attention(query, keys, keys);
}

Var MfeModel::fuse_global(Graph& g, const std::array<Var, kEncoderLevels>& basic,
                          const std::array<Var, kEncoderLevels>& global) const {
  const Var b = g.linear(g.add_n(basic), p(g, "mfe.fc2.w"), p(g, "mfe.fc2.b"));
  const Var gl = g.linear(g.add_n(global), p(g, "mfe.fc3.w"), p(g, "mfe.fc3.b"));
  const Var both[] = {b, gl};
  return g.linear(g.concat_cols(both), p(g, "mfe.fc1.w"), p(g, "mfe.fc1.b"));
}

Var MfeModel::global_token(Graph& g, const std::array<Var, kEncoderLevels>& feats,
                           const RegionMask& mask) const {
  const auto basic = basic_tokens(g, feats, mask);
  std::array<Var, kEncoderLevels> global;
  for (std::size_t j = 0; j < kEncoderLevels; ++j) global[j] = global_attention(g, j, basic[j], feats[j]);
  return fuse_global(g, basic, global);
}

Var MfeModel::local_token(Graph& g, Var patch) const {
  const std::size_t L = config_.local_size;
  if (g.shape(patch) != nn::Shape{3, L, L}) {
    throw Error("local token: expected patch 3x" + std::to_string(L) + "x" + std::to_string(L));
  }
  Var x = g.gelu(g.conv2d(patch, p(g, "local.conv1.w"), p(g, "local.conv1.b"), 2, Padding::Zero));
  x = g.gelu(g.conv2d(x, p(g, "local.conv2.w"), p(g, "local.conv2.b"), 2, Padding::Zero));
  const Var t = g.to_tokens(x);
  const Var sa = g.attention(g.linear(t, p(g, "local.sa.q.w"), std::nullopt),
                             g.linear(t, p(g, "local.sa.k.w"), std::nullopt),
                             g.linear(t, p(g, "local.sa.v.w"), std::nullopt));
  return g.linear(g.mean_rows(sa), p(g, "local.fc.w"), p(g, "local.fc.b"));
}

Var MfeModel::image_token(Graph& g, Var f4) const {
  return g.linear(g.spatial_mean(f4), p(g, "image.fc.w"), p(g, "image.fc.b"));
}

MfeModel::Tokens MfeModel::tokens(Graph& g, const std::array<Var, kEncoderLevels>& feats, Var patch,
                                  const RegionMask& mask) const {
  const std::size_t P = config_.token_dim;
  Tokens t;
  t.image = image_token(g, feats[3]);
  t.global = config_.use_global ? global_token(g, feats, mask)
                                : g.constant({1, P}, std::vector<double>(P, 0.0));
  t.local = config_.use_local ? local_token(g, patch)
                              : g.constant({1, P}, std::vector<double>(P, 0.0));
  return t;
}

Var MfeModel::head(Graph& g, const Tokens& tokens, Head which, const TaskQuery& query) const {
  Var task = g.row(p(g, "task.kind"), static_cast<std::size_t>(query.kind));
  if (is_judgment(query.kind)) task = g.add(task, g.row(p(g, "task.query"), query_slot(query)));
  const Var in[] = {tokens.image, tokens.global, tokens.local, task};
  const std::string n = std::string("head.") + kHeadNames[static_cast<std::size_t>(which)];
  const Var h = g.gelu(g.linear(g.concat_cols(in), p(g, n + ".fc1.w"), p(g, n + ".fc1.b")));
  const Var out = g.linear(h, p(g, n + ".fc2.w"), p(g, n + ".fc2.b"));
  if (which == Head::Severity) return g.reshape(out, {kDistortionTypeCount, kLevelCount});
  return out;
}

TaskLogits MfeModel::forward(const ImageBuffer& image, const RegionMask& mask) const {
  if (mask.height() != image.height() || mask.width() != image.width()) {
    throw Error("forward: mask and image dimensions differ");
  }
  Graph g(false);
  const std::size_t S = config_.input_size, L = config_.local_size;
  const Var input = g.constant({3, S, S}, prepare_image(image, S));
  const Var patch = g.constant({3, L, L}, prepare_patch(image, mask, L));
  const auto feats = encode(g, input);
  const Tokens t = tokens(g, feats, patch, mask);
  auto values = [&](Var v) {
    const auto s = g.value(v);
    return std::vector<double>(s.begin(), s.end());
  };
  TaskLogits out;
  out.quality = values(head(g, t, Head::Quality, {InstructionKind::AirQuality, 0}));
  out.importance = values(head(g, t, Head::Importance, {InstructionKind::AirImportance, 0}));
  out.presence = values(head(g, t, Head::Presence, {InstructionKind::AirDistortion, 0}));
  out.severity = values(head(g, t, Head::Severity, {InstructionKind::AirDistortion, 0}));
  out.judgment = values(head(g, t, Head::Judgment, {InstructionKind::JirQuality, 0}));
  return out;
}

void MfeModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "config.json", model_config_to_json(config_));
  nn::save_checkpoint(params_, dir / "model.ckpt");
}

MfeModel MfeModel::load(const std::filesystem::path& dir) {
  MfeModel m(parse_model_config(read_file(dir / "config.json")), 0);
  nn::load_checkpoint(m.params_, dir / "model.ckpt");
  return m;
}

}  // namespace roiqa
