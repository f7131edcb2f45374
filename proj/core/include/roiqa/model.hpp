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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "roiqa/instructions.hpp"
#include "roiqa/nn/graph.hpp"
#include "roiqa/nn/parameters.hpp"
#include "roiqa/types.hpp"

namespace roiqa {

inline constexpr std::size_t kEncoderLevels = 4;

struct ModelConfig {
  std::size_t input_size = 64;  // S; images are resized to S x S before encoding
  std::size_t token_dim = 64;   // P
  std::array<std::size_t, kEncoderLevels> channels{16, 32, 64, 128};
  std::size_t local_channels = 16;
  std::size_t local_size = 32;  // ROI patches are resized to this square before the local CNN
  std::size_t head_hidden = 64;
  bool use_global = true;
  bool use_local = true;

  /// Throws Error on S not divisible by 32, zero widths and similar.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string model_config_to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig parse_model_config(std::string_view text);

/// Logits for every task head.
struct TaskLogits {
  std::vector<double> quality;     // 5
  std::vector<double> importance;  // 5
  std::vector<double> presence;    // 6, one independent logit per distortion type
  std::vector<double> severity;    // 6 x 5, row per distortion type
  std::vector<double> judgment;    // 2: [No, Yes]
};

enum class Head { Quality, Importance, Presence, Severity, Judgment };

/// Which question a head is answering: the instruction kind plus, for
/// judgments, the queried level or distortion index.
struct TaskQuery {
  InstructionKind kind = InstructionKind::AirQuality;
  std::size_t query = 0;
};

/// Number of distinct judgment query slots: 5 quality levels, 5 importance
/// levels, 6 distortion types and "without distortions".
inline constexpr std::size_t kQuerySlots = 2 * kLevelCount + kDistortionTypeCount + 1;
std::size_t query_slot(const TaskQuery& q);

/// Encoder input: bilinear resize to S x S, planar 3 x S x S.
std::vector<double> prepare_image(const ImageBuffer& image, std::size_t size);

/// Local-view input: tight crop with background zeroed, bilinear resize to
/// `size` x `size`, planar 3 x size x size.
std::vector<double> prepare_patch(const ImageBuffer& image, const RegionMask& mask, std::size_t size);

/// Convolutional encoder, mask-based feature extractor, local-view path and
/// per-task heads, all on an nn::Graph.
class MfeModel {
 public:
  using Var = nn::Graph::Var;

  MfeModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  nn::ParameterSet& params() noexcept { return params_; }
  const nn::ParameterSet& params() const noexcept { return params_; }

  /// Input 3 x S x S -> four feature levels with strides 4, 8, 16, 32.
  std::array<Var, kEncoderLevels> encode(nn::Graph& g, Var input) const;

  /// B_j: mask pooling with coverage fractions of `mask` on level j's grid,
  /// then a per-level affine map to P.
  std::array<Var, kEncoderLevels> basic_tokens(nn::Graph& g,
                                               const std::array<Var, kEncoderLevels>& feats,
                                               const RegionMask& mask) const;
  /// G_j = attention(SA_j(B_j), FC(F_j), FC(F_j)).
  Var global_attention(nn::Graph& g, std::size_t level, Var basic, Var feat) const;
  /// F_gvt = FC_1(concat(FC_2(sum B_j), FC_3(sum G_j))).
  Var fuse_global(nn::Graph& g, const std::array<Var, kEncoderLevels>& basic,
                  const std::array<Var, kEncoderLevels>& global) const;
  /// F_gvt from features and mask.
  Var global_token(nn::Graph& g, const std::array<Var, kEncoderLevels>& feats,
                   const RegionMask& mask) const;
  /// F_lvt from a prepared 3 x L x L patch.
  Var local_token(nn::Graph& g, Var patch) const;
  /// Spatial mean of F_4 projected to P.
  Var image_token(nn::Graph& g, Var f4) const;

  struct Tokens {
    Var image;
    Var global;  // zeros when the global path is switched off
    Var local;   // zeros when the local path is switched off
  };
  /// Builds the (image, global, local) triple, honoring the ablation switches.
  Tokens tokens(nn::Graph& g, const std::array<Var, kEncoderLevels>& feats, Var patch,
                const RegionMask& mask) const;

  /// Logits of one head for a task query; shape 1 x K (severity 6 x 5).
  Var head(nn::Graph& g, const Tokens& tokens, Head which, const TaskQuery& query) const;

  /// Every head, evaluated with the query that is natural for it.
  TaskLogits forward(const ImageBuffer& image, const RegionMask& mask) const;

  void save(const std::filesystem::path& dir) const;  // config.json + model.ckpt
  static MfeModel load(const std::filesystem::path& dir);

 private:
  Var p(nn::Graph& g, std::string_view name) const;

  ModelConfig config_;
  nn::ParameterSet params_;
};

}  // namespace roiqa
