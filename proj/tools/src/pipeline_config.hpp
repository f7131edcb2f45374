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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa::cli {

/// Settings shared by the subcommands. Every field is optional; a command
/// flag overrides the matching field, and the command's default applies when
/// neither is given.
struct PipelineConfig {
  struct Paths {
    std::optional<std::string> ref_dir;
    std::optional<std::string> dataset_dir;
    std::optional<std::string> manifest;
    std::optional<std::string> split;
    std::optional<std::string> labels;
    std::optional<std::string> instructions;
    std::optional<std::string> checkpoint;
    std::optional<std::string> report;
    std::optional<std::string> annotators;
    std::optional<std::string> ratings_log;
  } paths;

  struct Seeds {
    std::optional<std::uint64_t> synth;
    std::optional<std::uint64_t> masks;
    std::optional<std::uint64_t> split;
    std::optional<std::uint64_t> instruct;
    std::optional<std::uint64_t> jir;
  } seeds;

  std::optional<std::vector<DistortionType>> families;
  std::optional<std::vector<std::size_t>> levels;  // empty vector = all
  std::optional<std::string> model_config;         // training config JSON
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<unsigned> jobs;
  std::optional<std::size_t> masks_per_image;
  std::optional<double> train_fraction;
  std::optional<double> clean_threshold;
  std::optional<std::string> template_mode;

  /// Throws Error naming the offending field.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types are rejected, then validate().
PipelineConfig parse_pipeline_config(std::string_view text);

/// "noise,blur" -> families. Throws Error on unknown or repeated names.
std::vector<DistortionType> parse_families(std::string_view list);
/// "all" -> {} ; "0,5,19" -> levels. Throws Error on bad or repeated indices.
std::vector<std::size_t> parse_levels(std::string_view list);

}  // namespace roiqa::cli
