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


// Writes the bundled reference fixtures: deterministic procedural scenes.

#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/scene.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write procedural reference scenes as PNG", "roiqa-fixtures"};
  std::string out = "data/fixtures";
  std::size_t count = 8, size = 128;
  std::uint64_t first_seed = 1;
  app.add_option("--out", out, "Output directory");
  app.add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber);
  app.add_option("--size", size, "Edge length in pixels")->check(CLI::Range(32, 4096));
  app.add_option("--first-seed", first_seed, "Seed of the first scene");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out);
    for (std::size_t i = 0; i < count; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "scene_%02zu.png", i);
      roiqa::write_png(std::filesystem::path(out) / name, roiqa::procedural_scene(first_seed + i, size, size));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "roiqa-fixtures: %s\n", e.what());
    return 1;
  }
  std::printf("{\"command\":\"fixtures\",\"images\":%zu,\"out\":\"%s\"}\n", count, out.c_str());
  return 0;
}
