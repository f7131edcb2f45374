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

#include "roiqa/instructions.hpp"

#include <algorithm>
#include <cctype>

#include "json_util.hpp"
#include "roiqa/fr_oracle.hpp"
#include "roiqa/random.hpp"
#include "roiqa/records.hpp"

namespace roiqa {

namespace {

using Variants = std::array<std::string_view, 3>;

constexpr Variants kAirQuality = {"Analyze the quality of this region",
                                  "Evaluate the quality of this region",
                                  "Assess the quality of this region"};
constexpr Variants kAirImportance = {
    "Consider the impact of this region on the overall image quality. Analyze it's importance",
    "Consider how this region affects the overall image quality. Analyze it's importance",
    "Consider the influence of this region on the overall image quality. Evaluate it's importance"};
constexpr Variants kAirDistortion = {"Analyze the distortions of this region",
                                     "Identify the distortions of this region",
                                     "Describe the distortions of this region"};

// "{}" marks the queried category or distortion name.
constexpr Variants kJirQuality = {"Is the quality of this region {}",
                                  "Is this region of {} quality",
                                  "Would you rate the quality of this region as {}"};
constexpr Variants kJirImportance = {"Is this region {} to the overall quality",
                                     "Is this region {} for the overall image quality",
                                     "Would you consider this region {} to the overall quality"};
constexpr Variants kJirDistortion = {"Is this region in {} distortion",
                                     "Does this region suffer from {} distortion",
                                     "Is there {} distortion in this region"};
constexpr Variants kJirClean = {"Is this region without distortions",
                                "Is this region free of distortions",
                                "Is this region clean of any distortion"};

constexpr std::array<std::string_view, kInstructionKindCount> kKindNames = {
    "AIR-quality", "AIR-importance", "AIR-distortion",
    "JIR-quality", "JIR-importance", "JIR-distortion"};

constexpr std::string_view kWithoutDistortions = "Without distortions";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string fill(std::string_view pattern, std::string_view value) {
  std::string out(pattern);
  const auto pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, value);
  return out;
}

std::size_t pick_variant(TemplateMode mode, Rng& rng) {
  return mode == TemplateMode::Fixed ? 0 : static_cast<std::size_t>(rng.index(3));
}

void require_labeled(const RoiLabelRecord& record) {
  record.validate();
  if (record.distortions.empty()) {
    throw Error("record '" + record.roi_id + "' has no distortion labels");
  }
}

std::string distortion_response(const std::vector<std::pair<DistortionType, std::size_t>>& present) {
  if (present.empty()) return std::string(kWithoutDistortions);
  const auto& severity = LevelScale::severity(kHumanScaleMax).categories();
  std::string out = "The distortions of this region: ";
  for (std::size_t i = 0; i < present.size(); ++i) {
    if (i) out += ", ";
    out += std::string(to_string(present[i].first)) + " (" +
           lower(severity[present[i].second]) + ")";
  }
  return out + ".";
}

std::string level_response(InstructionKind kind, std::size_t level) {
  if (kind == InstructionKind::AirQuality) {
    return "The quality of this region is " +
           lower(LevelScale::quality(1).categories()[level]) + ".";
  }
  return "The importance of this region to the overall image quality is " +
         lower(LevelScale::importance(1).categories()[level]) + ".";
}

}  // namespace

std::string_view to_string(InstructionKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

InstructionKind parse_instruction_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<InstructionKind>(i);
  }
  throw Error("unknown instruction kind '" + std::string(name) + "'");
}

TemplateMode parse_template_mode(std::string_view name) {
  if (name == "fixed") return TemplateMode::Fixed;
  if (name == "random") return TemplateMode::Random;
  throw Error("unknown template mode '" + std::string(name) + "' (expected fixed|random)");
}

std::size_t quality_level(const RoiLabelRecord& record) {
  const Score& s = record.quality_score;
  return discretize(s.value, LevelScale::quality(s.max_value())).index;
}

std::size_t importance_level(const RoiLabelRecord& record) {
  const Score& s = record.importance_score;
  return discretize(s.value, LevelScale::importance(s.max_value())).index;
}

std::vector<std::pair<DistortionType, std::size_t>> present_distortions(
    const RoiLabelRecord& record) {
  std::vector<std::pair<DistortionType, std::size_t>> out;
  for (const auto& d : record.distortions) {
    if (!d.present) continue;
    out.emplace_back(d.type, discretize(*d.severity, LevelScale::severity(kHumanScaleMax)).index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<InstructionRecord> gen_air(const RoiLabelRecord& record, TemplateMode mode,
                                       std::uint64_t seed) {
  require_labeled(record);
  Rng rng(mix_keys(mix_keys(seed, fnv1a64(record.roi_id)), 0xa1));
  std::vector<InstructionRecord> out;

  InstructionRecord q{record.roi_id, InstructionKind::AirQuality,
                      std::string(kAirQuality[pick_variant(mode, rng)]), {}, {}};
  q.target.level = quality_level(record);
  q.response = level_response(q.kind, *q.target.level);
  out.push_back(std::move(q));

  InstructionRecord imp{record.roi_id, InstructionKind::AirImportance,
                        std::string(kAirImportance[pick_variant(mode, rng)]), {}, {}};
  imp.target.level = importance_level(record);
  imp.response = level_response(imp.kind, *imp.target.level);
  out.push_back(std::move(imp));

  InstructionRecord d{record.roi_id, InstructionKind::AirDistortion,
                      std::string(kAirDistortion[pick_variant(mode, rng)]), {}, {}};
  d.target.distortions = present_distortions(record);
  d.response = distortion_response(d.target.distortions);
  out.push_back(std::move(d));
  return out;
}

std::string judgment_text(InstructionKind kind, std::size_t query, std::size_t variant) {
  switch (kind) {
    case InstructionKind::JirQuality:
      return fill(kJirQuality.at(variant), lower(LevelScale::quality(1).categories().at(query)));
    case InstructionKind::JirImportance:
      return fill(kJirImportance.at(variant),
                  lower(LevelScale::importance(1).categories().at(query)));
    case InstructionKind::JirDistortion:
      if (query == kCleanQuery) return std::string(kJirClean.at(variant));
      return fill(kJirDistortion.at(variant),
                  to_string(static_cast<DistortionType>(query)));
    default:
      throw Error("judgment_text: not a judgment kind");
  }
}

std::vector<InstructionRecord> gen_jir(const RoiLabelRecord& record, std::uint64_t seed,
                                       TemplateMode mode) {
  require_labeled(record);
  Rng rng(mix_keys(mix_keys(seed, fnv1a64(record.roi_id)), 0x71));
  std::vector<InstructionRecord> out;

  const auto level_query = [&](InstructionKind kind, std::size_t truth_level) {
    const bool truth = rng.bernoulli(0.5);
    std::size_t query = truth_level;
    if (!truth) {
      query = static_cast<std::size_t>(rng.index(kLevelCount - 1));
      if (query >= truth_level) ++query;
    }
    InstructionRecord r{record.roi_id, kind, judgment_text(kind, query, pick_variant(mode, rng)),
                        truth ? "Yes" : "No", {}};
    r.target.query = query;
    r.target.answer = truth;
    out.push_back(std::move(r));
  };
  level_query(InstructionKind::JirQuality, quality_level(record));
  level_query(InstructionKind::JirImportance, importance_level(record));

  const auto present = present_distortions(record);
  std::vector<std::size_t> yes_queries;
  std::vector<std::size_t> no_queries;
  for (DistortionType t : kAllDistortionTypes) {
    const bool is_present = std::any_of(present.begin(), present.end(),
                                        [t](const auto& p) { return p.first == t; });
    (is_present ? yes_queries : no_queries).push_back(index_of(t));
  }
  (present.empty() ? yes_queries : no_queries).push_back(kCleanQuery);

  const bool truth = rng.bernoulli(0.5);
  const auto& pool = truth ? yes_queries : no_queries;
  const std::size_t query = pool[static_cast<std::size_t>(rng.index(pool.size()))];
  InstructionRecord r{record.roi_id, InstructionKind::JirDistortion,
                      judgment_text(InstructionKind::JirDistortion, query, pick_variant(mode, rng)),
                      truth ? "Yes" : "No", {}};
  r.target.query = query;
  r.target.answer = truth;
  out.push_back(std::move(r));
  return out;
}

std::string render_sequence(const InstructionRecord& record) {
  if (record.instruction.empty()) throw Error("render_sequence: empty instruction");
  return "<image>\n. This is the overview of the image. Here is the region <global> <local>. " +
         record.instruction;
}

bool response_matches_target(const InstructionRecord& r) {
  const std::string resp = lower(r.response);
  switch (r.kind) {
    case InstructionKind::AirQuality:
    case InstructionKind::AirImportance: {
      if (!r.target.level) return false;
      const auto& names = r.kind == InstructionKind::AirQuality
                              ? LevelScale::quality(1).categories()
                              : LevelScale::importance(1).categories();
      std::size_t named = 0;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (resp.find(" " + lower(names[i]) + ".") != std::string::npos) {
          if (i != *r.target.level) return false;
          ++named;
        }
      }
      return named == 1;
    }
    case InstructionKind::AirDistortion:
      return r.response == distortion_response(r.target.distortions);
    default:
      return r.target.answer.has_value() && (r.response == (*r.target.answer ? "Yes" : "No"));
  }
}

std::string instruction_to_json(const InstructionRecord& r) {
  detail::Json target = detail::Json::object();
  if (r.target.level) target["level"] = *r.target.level;
  if (!r.target.distortions.empty() || r.kind == InstructionKind::AirDistortion) {
    detail::Json list = detail::Json::array();
    for (const auto& [type, sev] : r.target.distortions) {
      list.push_back({{"type", to_string(type)}, {"severity_level", sev}});
    }
    target["distortions"] = std::move(list);
  }
  if (r.target.query) target["query"] = *r.target.query;
  if (r.target.answer) target["answer"] = *r.target.answer;
  detail::Json j;
  j["roi_id"] = r.roi_id;
  j["kind"] = to_string(r.kind);
  j["instruction"] = r.instruction;
  j["response"] = r.response;
  j["target"] = std::move(target);
  return detail::dump_line(j);
}

InstructionRecord parse_instruction(std::string_view line) {
  constexpr std::string_view what = "InstructionRecord";
  const auto j = detail::parse_json(line, what);
  InstructionRecord r;
  r.roi_id = detail::require<std::string>(j, "roi_id", what);
  r.kind = parse_instruction_kind(detail::require<std::string>(j, "kind", what));
  r.instruction = detail::require<std::string>(j, "instruction", what);
  r.response = detail::require<std::string>(j, "response", what);
  const auto t = detail::require<detail::Json>(j, "target", what);
  if (t.contains("level")) r.target.level = t.at("level").get<std::size_t>();
  if (t.contains("distortions")) {
    for (const auto& d : t.at("distortions")) {
      r.target.distortions.emplace_back(parse_distortion_type(d.at("type").get<std::string>()),
                                        d.at("severity_level").get<std::size_t>());
    }
  }
  if (t.contains("query")) r.target.query = t.at("query").get<std::size_t>();
  if (t.contains("answer")) r.target.answer = t.at("answer").get<bool>();
  return r;
}

std::vector<InstructionRecord> generate_instructions(const std::vector<RoiLabelRecord>& records,
                                                     TemplateMode mode, std::uint64_t seed) {
  std::vector<InstructionRecord> out;
  out.reserve(records.size() * 6);
  for (const auto& rec : records) {
    for (auto& r : gen_air(rec, mode, seed)) out.push_back(std::move(r));
    for (auto& r : gen_jir(rec, seed, mode)) out.push_back(std::move(r));
  }
  return out;
}

void write_instructions(const std::filesystem::path& path,
                        const std::vector<InstructionRecord>& records) {
  std::string text;
  for (const auto& r : records) {
    text += instruction_to_json(r);
    text += '\n';
  }
  write_file_atomic(path, text);
}

}  // namespace roiqa
