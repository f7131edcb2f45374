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


#include <benchmark/benchmark.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roiqa/distortion.hpp"
#include "roiqa/fr_oracle.hpp"
#include "roiqa/model.hpp"
#include "roiqa/nn/graph.hpp"
#include "roiqa/random.hpp"
#include "roiqa/scene.hpp"

namespace {

using roiqa::nn::Graph;

std::vector<double> noise(roiqa::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const std::size_t side = 32;
  roiqa::Rng rng(1);
  const auto x = noise(rng, c * side * side), w = noise(rng, c * c * 9);
  for (auto _ : state) {
    Graph g(false);
    const auto y = g.conv2d(g.constant({c, side, side}, x), g.constant({c, c, 3, 3}, w), std::nullopt, 1,
                            roiqa::nn::Padding::Zero);
    benchmark::DoNotOptimize(g.value(y).data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c * c * 9 * side * side));
}
BENCHMARK(BM_Conv2d)->Arg(8)->Arg(16)->Arg(32);

void BM_Attention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 32;
  roiqa::Rng rng(2);
  const auto q = noise(rng, n * d), k = noise(rng, n * d), v = noise(rng, n * d);
  for (auto _ : state) {
    Graph g(false);
    const auto y = g.attention(g.constant({n, d}, q), g.constant({n, d}, k), g.constant({n, d}, v));
    benchmark::DoNotOptimize(g.value(y).data());
  }
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(64)->Arg(256);

void BM_FrScore(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto ref = roiqa::procedural_scene(3, side, side);
  const auto dist = roiqa::gaussian_blur(ref, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(roiqa::fr_score(dist, ref));
}
BENCHMARK(BM_FrScore)->Arg(64)->Arg(128)->Arg(256);

void BM_ApplyDistortion(benchmark::State& state) {
  const auto type = static_cast<roiqa::DistortionType>(state.range(0));
  const auto ref = roiqa::procedural_scene(4, 128, 128);
  const auto spec = roiqa::DistortionSpec::at_level(type, 15, 9);
  for (auto _ : state) benchmark::DoNotOptimize(roiqa::apply_distortion(ref, spec, "bench"));
  state.SetLabel(std::string(roiqa::to_string(type)));
}
BENCHMARK(BM_ApplyDistortion)->DenseRange(0, 5);

void BM_ModelForward(benchmark::State& state) {
  const roiqa::ModelConfig config;
  const roiqa::MfeModel model(config, 5);
  const auto image = roiqa::procedural_scene(6, 128, 128);
  roiqa::RegionMask mask(128, 128);
  for (std::size_t r = 32; r < 96; ++r)
    for (std::size_t c = 40; c < 100; ++c) mask.set(r, c, true);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(image, mask));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
