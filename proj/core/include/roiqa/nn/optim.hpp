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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "roiqa/nn/graph.hpp"
#include "roiqa/nn/parameters.hpp"
#include "roiqa/random.hpp"

namespace roiqa::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

class Adam {
 public:
  Adam(ParameterSet& params, AdamOptions options = {});

  /// Updates every trainable parameter; frozen ones keep their values.
  void step(const Gradients& grads, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  ParameterSet& params_;
  AdamOptions opt_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

/// Cosine decay from `max_lr` at step 0 to `min_lr` at `total_steps`.
double cosine_lr(std::size_t step, std::size_t total_steps, double max_lr, double min_lr);

/// Zero-mean normal with stddev sqrt(2 / fan_in).
void he_normal(Parameter& p, std::size_t fan_in, Rng& rng);
void fill(Parameter& p, double value);

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t max_elements_per_param = 64;  // sampled when a parameter is larger
  std::uint64_t seed = 1;
  double abs_floor = 1e-7;  // pairs where both |a| and |n| are below it are skipped
  /// 2: central difference. 4: five-point stencil, whose O(eps^4) truncation
  /// allows a larger eps and so less cancellation on tiny gradients.
  int order = 2;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "name[index]" of the worst element
};

/// Builds a scalar loss from the current parameter values.
using LossFn = std::function<Graph::Var(Graph&)>;

/// Compares analytic parameter gradients with central differences,
/// rel = |a - n| / (|a| + |n| + 1e-12).
GradCheckResult grad_check(const LossFn& loss, ParameterSet& params,
                           const GradCheckOptions& options = {});

/// Directional variant: for random unit directions d, compares g.d with
/// (L(p + eps d) - L(p - eps d)) / (2 eps). Less sensitive to the rounding of
/// individually tiny gradient entries.
GradCheckResult grad_check_directional(const LossFn& loss, ParameterSet& params,
                                       std::size_t directions, const GradCheckOptions& options = {});

}  // namespace roiqa::nn
