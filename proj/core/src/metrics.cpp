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

#include "roiqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "roiqa/nn/graph.hpp"
#include "roiqa/types.hpp"

namespace roiqa {

double closed_set_score(std::span<const double> level_logits) {
  if (level_logits.empty()) throw Error("closed_set_score: no logits");
  for (double v : level_logits)
    if (!std::isfinite(v)) throw Error("closed_set_score: non-finite logit");
  const auto p = nn::softmax_rows(level_logits, 1, level_logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * static_cast<double>(i);
  return s;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) throw Error(std::string(what) + ": length mismatch");
  if (x.size() < 3) throw Error(std::string(what) + ": need at least 3 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(std::string(what) + ": non-finite value");
    }
  }
}

// Returns NaN on zero variance.
double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double plcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "plcc");
  const double r = pearson(x, y);
  if (std::isnan(r)) throw Error("plcc: zero variance");
  return r;
}

double srocc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "srocc");
  const double r = pearson(average_ranks(x), average_ranks(y));
  if (std::isnan(r)) throw Error("srocc: zero rank variance");
  return r;
}

Correlation safe_plcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "plcc");
  const double r = pearson(x, y);
  return std::isnan(r) ? Correlation{0.0, true} : Correlation{r, false};
}

Correlation safe_srocc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "srocc");
  const double r = pearson(average_ranks(x), average_ranks(y));
  return std::isnan(r) ? Correlation{0.0, true} : Correlation{r, false};
}

Prf sample_prf(std::span<const std::size_t> gt, std::span<const std::size_t> pred) {
  const std::set<std::size_t> g(gt.begin(), gt.end());
  const std::set<std::size_t> p(pred.begin(), pred.end());
  if (g.empty() && p.empty()) return {1.0, 1.0, 1.0};
  std::size_t hit = 0;
  for (std::size_t v : p) hit += g.count(v);
  Prf r;
  r.precision = p.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(p.size());
  r.recall = g.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(g.size());
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

Prf average_prf(std::span<const Prf> samples) {
  if (samples.empty()) throw Error("average_prf: no samples");
  Prf m;
  for (const Prf& s : samples) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(samples.size());
  return {m.precision / n, m.recall / n, m.f1 / n};
}

}  // namespace roiqa
