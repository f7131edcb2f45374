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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "roiqa/types.hpp"

namespace roiqa {

enum class InstructionKind : int {
  AirQuality = 0,
  AirImportance = 1,
  AirDistortion = 2,
  JirQuality = 3,
  JirImportance = 4,
  JirDistortion = 5,
};

inline constexpr std::size_t kInstructionKindCount = 6;

std::string_view to_string(InstructionKind kind);
InstructionKind parse_instruction_kind(std::string_view name);
inline bool is_judgment(InstructionKind k) { return static_cast<int>(k) >= 3; }

/// Distortion-judgment query index for "without distortions"; 0..5 are the
/// distortion types.
inline constexpr std::size_t kCleanQuery = kDistortionTypeCount;

/// Structured label that accompanies every text response.
struct InstructionTarget {
  std::optional<std::size_t> level;  // analysis of quality / importance
  std::vector<std::pair<DistortionType, std::size_t>> distortions;  // (type, severity level)
  std::optional<std::size_t> query;  // judgment: queried level or distortion query index
  std::optional<bool> answer;        // judgment: expected Yes / No

  friend bool operator==(const InstructionTarget&, const InstructionTarget&) = default;
};

struct InstructionRecord {
  std::string roi_id;
  InstructionKind kind = InstructionKind::AirQuality;
  std::string instruction;
  std::string response;
  InstructionTarget target;

  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

/// Fixed mode always uses the canonical phrasing; random mode draws one of
/// three phrasings per template.
enum class TemplateMode { Fixed, Random };

TemplateMode parse_template_mode(std::string_view name);

/// Quality and importance levels of a labeled record, and the severity level
/// of each present distortion.
std::size_t quality_level(const RoiLabelRecord& record);
std::size_t importance_level(const RoiLabelRecord& record);
std::vector<std::pair<DistortionType, std::size_t>> present_distortions(
    const RoiLabelRecord& record);

std::vector<InstructionRecord> gen_air(const RoiLabelRecord& record,
                                       TemplateMode mode = TemplateMode::Fixed,
                                       std::uint64_t seed = 0);

/// One judgment per kind; each queried condition is true with probability 1/2.
std::vector<InstructionRecord> gen_jir(const RoiLabelRecord& record, std::uint64_t seed,
                                       TemplateMode mode = TemplateMode::Fixed);

/// Text of a judgment query, canonical phrasing.
std::string judgment_text(InstructionKind kind, std::size_t query, std::size_t variant = 0);

/// "<image>\n. This is the overview of the image. Here is the region <global> <local>. "
/// followed by the instruction.
std::string render_sequence(const InstructionRecord& record);

/// Cross-checks the response text against the structured target.
bool response_matches_target(const InstructionRecord& record);

std::string instruction_to_json(const InstructionRecord& record);
InstructionRecord parse_instruction(std::string_view line);

/// AIRs and JIRs for every record, in record order.
std::vector<InstructionRecord> generate_instructions(const std::vector<RoiLabelRecord>& records,
                                                     TemplateMode mode, std::uint64_t seed);
void write_instructions(const std::filesystem::path& path,
                        const std::vector<InstructionRecord>& records);

}  // namespace roiqa
