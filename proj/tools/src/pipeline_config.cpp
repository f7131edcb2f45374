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


#include "pipeline_config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "roiqa/distortion.hpp"
#include "roiqa/instructions.hpp"

namespace roiqa::cli {

namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!obj.is_object()) throw Error("pipeline config: '" + where + "' must be an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw Error("pipeline config: unknown key '" + (where.empty() ? k : where + "." + k) + "'");
    }
  }
}

template <typename T>
void read(const Json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string name = where.empty() ? key : where + "." + key;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw Error("pipeline config: '" + name + "' must be a string");
  } else if constexpr (std::is_same_v<T, double>) {
    if (!it->is_number()) throw Error("pipeline config: '" + name + "' must be a number");
  } else {
    if (!it->is_number_integer()) throw Error("pipeline config: '" + name + "' must be an integer");
    if (std::is_unsigned_v<T> && it->get<std::int64_t>() < 0) {
      throw Error("pipeline config: '" + name + "' must be non-negative");
    }
  }
  out = it->get<T>();
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(',', start), s.size());
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

std::vector<DistortionType> parse_families(std::string_view list) {
  std::vector<DistortionType> out;
  for (std::string_view name : split_commas(list)) {
    const DistortionType t = parse_distortion_type(name);
    if (std::find(out.begin(), out.end(), t) != out.end()) {
      throw Error("repeated distortion family '" + std::string(name) + "'");
    }
    out.push_back(t);
  }
  return out;
}

std::vector<std::size_t> parse_levels(std::string_view list) {
  if (list == "all") return {};
  std::vector<std::size_t> out;
  for (std::string_view tok : split_commas(list)) {
    std::size_t v = 0;
    if (tok.empty() || tok.size() > 2 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error("bad level '" + std::string(tok) + "' (expected 'all' or indices 0-19)");
    }
    for (char c : tok) v = v * 10 + static_cast<std::size_t>(c - '0');
    if (v >= kLevelsPerFamily) throw Error("level " + std::to_string(v) + " out of range 0-19");
    if (std::find(out.begin(), out.end(), v) != out.end()) {
      throw Error("repeated level " + std::to_string(v));
    }
    out.push_back(v);
  }
  return out;
}

void PipelineConfig::validate() const {
  if (families && families->empty()) throw Error("pipeline config: 'families' must not be empty");
  if (levels) {
    std::set<std::size_t> seen;
    for (std::size_t l : *levels) {
      if (l >= kLevelsPerFamily) throw Error("pipeline config: level " + std::to_string(l) + " out of range 0-19");
      if (!seen.insert(l).second) throw Error("pipeline config: repeated level " + std::to_string(l));
    }
  }
  if (port && (*port < 0 || *port > 65535)) throw Error("pipeline config: 'service.port' out of range");
  if (jobs && *jobs == 0) throw Error("pipeline config: 'jobs' must be at least 1");
  if (masks_per_image && *masks_per_image == 0) {
    throw Error("pipeline config: 'masks_per_image' must be at least 1");
  }
  if (train_fraction && !(*train_fraction > 0.0 && *train_fraction < 1.0)) {
    throw Error("pipeline config: 'train_fraction' must lie in (0, 1)");
  }
  if (clean_threshold && !(*clean_threshold > 0.0 && *clean_threshold <= 1.0)) {
    throw Error("pipeline config: 'clean_threshold' must lie in (0, 1]");
  }
  if (template_mode) parse_template_mode(*template_mode);
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(std::string("pipeline config: ") + e.what());
  }
  reject_unknown(j,
                 {"paths", "seeds", "families", "levels", "model_config", "service", "jobs",
                  "masks_per_image", "train_fraction", "clean_threshold", "template_mode"},
                 "");
  PipelineConfig c;
  if (j.contains("paths")) {
    const Json& p = j["paths"];
    reject_unknown(p,
                   {"ref_dir", "dataset_dir", "manifest", "split", "labels", "instructions",
                    "checkpoint", "report", "annotators", "ratings_log"},
                   "paths");
    read(p, "ref_dir", c.paths.ref_dir, "paths");
    read(p, "dataset_dir", c.paths.dataset_dir, "paths");
    read(p, "manifest", c.paths.manifest, "paths");
    read(p, "split", c.paths.split, "paths");
    read(p, "labels", c.paths.labels, "paths");
    read(p, "instructions", c.paths.instructions, "paths");
    read(p, "checkpoint", c.paths.checkpoint, "paths");
    read(p, "report", c.paths.report, "paths");
    read(p, "annotators", c.paths.annotators, "paths");
    read(p, "ratings_log", c.paths.ratings_log, "paths");
  }
  if (j.contains("seeds")) {
    const Json& s = j["seeds"];
    reject_unknown(s, {"synth", "masks", "split", "instruct", "jir"}, "seeds");
    read(s, "synth", c.seeds.synth, "seeds");
    read(s, "masks", c.seeds.masks, "seeds");
    read(s, "split", c.seeds.split, "seeds");
    read(s, "instruct", c.seeds.instruct, "seeds");
    read(s, "jir", c.seeds.jir, "seeds");
  }
  if (j.contains("service")) {
    const Json& s = j["service"];
    reject_unknown(s, {"host", "port"}, "service");
    read(s, "host", c.host, "service");
    read(s, "port", c.port, "service");
  }
  if (j.contains("families")) {
    if (!j["families"].is_array()) throw Error("pipeline config: 'families' must be an array");
    std::vector<DistortionType> fams;
    for (const Json& f : j["families"]) {
      if (!f.is_string()) throw Error("pipeline config: 'families' entries must be strings");
      const DistortionType t = parse_distortion_type(f.get<std::string>());
      if (std::find(fams.begin(), fams.end(), t) != fams.end()) {
        throw Error("pipeline config: repeated family '" + f.get<std::string>() + "'");
      }
      fams.push_back(t);
    }
    c.families = std::move(fams);
  }
  if (j.contains("levels")) {
    const Json& l = j["levels"];
    if (l.is_string() && l.get<std::string>() == "all") {
      c.levels = std::vector<std::size_t>{};
    } else if (l.is_array()) {
      std::vector<std::size_t> levels;
      for (const Json& v : l) {
        if (!v.is_number_unsigned()) throw Error("pipeline config: 'levels' entries must be indices 0-19");
        levels.push_back(v.get<std::size_t>());
      }
      if (levels.empty()) throw Error("pipeline config: 'levels' must not be empty");
      c.levels = std::move(levels);
    } else {
      throw Error("pipeline config: 'levels' must be \"all\" or an array of indices");
    }
  }
  read(j, "model_config", c.model_config, "");
  read(j, "jobs", c.jobs, "");
  read(j, "masks_per_image", c.masks_per_image, "");
  read(j, "train_fraction", c.train_fraction, "");
  read(j, "clean_threshold", c.clean_threshold, "");
  read(j, "template_mode", c.template_mode, "");
  c.validate();
  return c;
}

}  // namespace roiqa::cli
