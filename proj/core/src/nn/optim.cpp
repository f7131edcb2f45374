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

#include "roiqa/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roiqa/types.hpp"

namespace roiqa::nn {

Adam::Adam(ParameterSet& params, AdamOptions options) : params_(params), opt_(options) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].size(), 0.0);
    v_.emplace_back(params[i].size(), 0.0);
  }
}

void Adam::step(const Gradients& grads, double lr) {
  if (grads.size() != params_.size()) throw Error("adam: gradient set does not match parameters");
  ++t_;
  const double b1t = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double b2t = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = params_[i];
    if (!p.trainable) continue;
    auto w = p.value();
    const auto g = grads[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = opt_.beta1 * m[j] + (1.0 - opt_.beta1) * g[j];
      v[j] = opt_.beta2 * v[j] + (1.0 - opt_.beta2) * g[j] * g[j];
      const double update = (m[j] / b1t) / (std::sqrt(v[j] / b2t) + opt_.eps);
      w[j] -= lr * (update + opt_.weight_decay * w[j]);
    }
  }
}

double cosine_lr(std::size_t step, std::size_t total_steps, double max_lr, double min_lr) {
  if (total_steps == 0) return max_lr;
  const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return min_lr + (max_lr - min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void he_normal(Parameter& p, std::size_t fan_in, Rng& rng) {
  const double sd = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : p.value()) v = rng.normal() * sd;
}

void fill(Parameter& p, double value) {
  for (double& v : p.value()) v = value;
}

namespace {

double rel_error(double a, double n) { return std::abs(a - n) / (std::abs(a) + std::abs(n) + 1e-12); }

double eval_loss(const LossFn& loss) {
  Graph g;
  const Graph::Var y = loss(g);
  const double v = g.value(y)[0];
  if (!std::isfinite(v)) throw Error("grad_check: loss is not finite");
  return v;
}

Gradients analytic(const LossFn& loss, ParameterSet& params) {
  Graph g;
  const Graph::Var y = loss(g);
  g.backward(y);
  Gradients grads(params);
  g.accumulate(grads);
  return grads;
}

// Numeric derivative of L(orig + t) at t = 0; `at` evaluates the loss with
// the perturbation applied.
double numeric_derivative(const std::function<double(double)>& at, const GradCheckOptions& o) {
  const double e = o.eps;
  if (o.order == 4) return (-at(2 * e) + 8 * at(e) - 8 * at(-e) + at(-2 * e)) / (12 * e);
  return (at(e) - at(-e)) / (2 * e);
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss, ParameterSet& params,
                           const GradCheckOptions& options) {
  if (options.order != 2 && options.order != 4) throw Error("grad_check: order must be 2 or 4");
  const Gradients grads = analytic(loss, params);
  GradCheckResult result;
  Rng rng(options.seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (!p.trainable) continue;
    std::vector<std::size_t> idx(p.size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    if (idx.size() > options.max_elements_per_param) {
      rng.shuffle(idx.begin(), idx.end());
      idx.resize(options.max_elements_per_param);
    }
    auto w = p.value();
    for (std::size_t j : idx) {
      const double orig = w[j];
      const double num = numeric_derivative(
          [&](double t) {
            w[j] = orig + t;
            const double v = eval_loss(loss);
            w[j] = orig;
            return v;
          },
          options);
      const double ana = grads[i][j];
      if (std::abs(num) < options.abs_floor && std::abs(ana) < options.abs_floor) continue;
      const double err = rel_error(ana, num);
      ++result.checked;
      if (err >= result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = p.name() + "[" + std::to_string(j) + "]";
      }
    }
  }
  return result;
}

GradCheckResult grad_check_directional(const LossFn& loss, ParameterSet& params,
                                       std::size_t directions, const GradCheckOptions& options) {
  if (options.order != 2 && options.order != 4) throw Error("grad_check: order must be 2 or 4");
  const Gradients grads = analytic(loss, params);
  GradCheckResult result;
  Rng rng(options.seed);
  for (std::size_t d = 0; d < directions; ++d) {
    std::vector<std::vector<double>> dir(params.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!params[i].trainable) continue;
      dir[i].resize(params[i].size());
      for (double& v : dir[i]) {
        v = rng.normal();
        norm2 += v * v;
      }
    }
    if (norm2 == 0.0) break;
    const double inv = 1.0 / std::sqrt(norm2);
    double ana = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t j = 0; j < dir[i].size(); ++j) {
        dir[i][j] *= inv;
        ana += grads[i][j] * dir[i][j];
      }
    auto shift = [&](double s) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto w = params[i].value();
        for (std::size_t j = 0; j < dir[i].size(); ++j) w[j] += s * dir[i][j];
      }
    };
    // Save and restore exactly rather than relying on +eps -eps cancelling.
    std::vector<std::vector<double>> saved(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto w = params[i].value();
      saved[i].assign(w.begin(), w.end());
    }
    auto restore = [&] {
      for (std::size_t i = 0; i < params.size(); ++i)
        std::copy(saved[i].begin(), saved[i].end(), params[i].value().begin());
    };
    const double num = numeric_derivative(
        [&](double t) {
          shift(t);
          const double v = eval_loss(loss);
          restore();
          return v;
        },
        options);
    if (std::abs(num) < options.abs_floor && std::abs(ana) < options.abs_floor) continue;
    const double err = rel_error(ana, num);
    ++result.checked;
    if (err >= result.max_rel_error) {
      result.max_rel_error = err;
      result.worst = "direction " + std::to_string(d);
    }
  }
  return result;
}

}  // namespace roiqa::nn
