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

#include "roiqa/types.hpp"

namespace roiqa {

/// Synthetic reference picture: a two-tone backdrop and a few overlapping
/// shapes, each filled with a flat, striped, checkered or smoothly varying
/// texture of low amplitude. Deterministic in `seed`.
ImageBuffer procedural_scene(std::uint64_t seed, std::size_t height = 128,
                             std::size_t width = 128);

/// Uniform mid-gray (0.5) card.
ImageBuffer gray_card(std::size_t height = 128, std::size_t width = 128);

}  // namespace roiqa
