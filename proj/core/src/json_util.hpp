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

// Private to the core library: nlohmann/json never appears in public headers.

#include <string>
#include <string_view>

#include "json.hpp"
#include "roiqa/types.hpp"

namespace roiqa::detail {

using Json = nlohmann::ordered_json;

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string(what) + ": invalid JSON: " + e.what());
  }
}

/// Field access that reports the missing key instead of nlohmann's generic text.
template <typename T>
T require(const Json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string(what) + ": field '" + key + "': " + e.what());
  }
}

inline std::string dump_line(const Json& j) { return j.dump(-1, ' ', false); }

}  // namespace roiqa::detail
