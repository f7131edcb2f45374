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
#include <span>
#include <vector>

namespace roiqa {

/// Expected level under softmax(logits): sum_i p_i * i, in [0, 4] for five levels.
double closed_set_score(std::span<const double> level_logits);

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation. Throws on length mismatch, fewer than 3 samples or
/// zero variance.
double plcc(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks, same preconditions as plcc.
double srocc(std::span<const double> x, std::span<const double> y);

/// Correlation that reports a zero-variance input as 0 with a flag instead of
/// throwing.
struct Correlation {
  double value = 0.0;
  bool degenerate = false;
};
Correlation safe_plcc(std::span<const double> x, std::span<const double> y);
Correlation safe_srocc(std::span<const double> x, std::span<const double> y);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Set precision/recall/F1 for one sample. Labels are opaque integers;
/// duplicates are ignored. Two empty sets score (1, 1, 1).
Prf sample_prf(std::span<const std::size_t> gt, std::span<const std::size_t> pred);

/// Mean of per-sample scores.
Prf average_prf(std::span<const Prf> samples);

}  // namespace roiqa
