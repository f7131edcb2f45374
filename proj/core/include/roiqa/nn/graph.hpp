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

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "roiqa/nn/parameters.hpp"

namespace roiqa::nn {

enum class Padding { Zero, Reflect };

/// Tape of double-precision tensor operations with reverse-mode
/// differentiation. Nodes are appended in evaluation order, so the tape is a
/// topological order and backward() walks it in reverse.
///
/// A Graph is single-threaded; build one per forward pass.
class Graph {
 public:
  struct Var {
    std::uint32_t id = 0;
  };

  Graph() = default;
  /// With tracking off no node requires a gradient, so no backward state is kept.
  explicit Graph(bool track_gradients) : track_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Shape shape, std::vector<double> values);
  /// Leaf whose gradient is tracked (used for input-gradient checks).
  Var variable(Shape shape, std::vector<double> values);
  /// Binds a parameter's current value. Gradients reach it only when it is
  /// trainable.
  Var param(const Parameter& p);

  // x: C x H x W, w: O x C x k x k (k odd), bias: O. Same-style padding k/2.
  Var conv2d(Var x, Var w, std::optional<Var> bias, std::size_t stride, Padding padding);
  // x: n x in, w: out x in, b: out.
  Var linear(Var x, Var w, std::optional<Var> bias);
  // softmax(Q K^T / sqrt(P)) V, single head, row-wise max-subtracted softmax.
  Var attention(Var q, Var k, Var v);
  Var softmax(Var x);  // row-wise over the last axis of an n x d tensor
  Var gelu(Var x);
  Var add(Var a, Var b);
  Var add_n(std::span<const Var> xs);
  Var scale(Var x, double factor);
  Var channel_affine(Var x, Var gamma, Var beta);  // x: C x H x W
  Var to_tokens(Var x);                            // C x H x W -> (H*W) x C
  // Weighted spatial mean of C x H x W with fixed weights (length H*W) -> 1 x C.
  Var weighted_spatial_mean(Var x, std::span<const double> weights);
  Var spatial_mean(Var x);  // C x H x W -> 1 x C
  Var mean_rows(Var x);     // n x d -> 1 x d
  Var concat_cols(std::span<const Var> xs);  // each 1 x d_i -> 1 x sum(d_i)
  Var row(Var x, std::size_t index);         // r x d -> 1 x d
  Var reshape(Var x, Shape shape);
  Var sum(Var x);                                // -> [1]
  Var dot(Var x, std::span<const double> weights);  // sum_i w_i x_i -> [1]
  // Softmax cross-entropy of row `row` of an r x K logit tensor.
  Var cross_entropy(Var logits, std::size_t row, std::size_t target);
  // Sum over elements of binary cross-entropy with logits; targets in [0,1].
  Var bce_with_logits(Var logits, std::span<const double> targets);

  const Shape& shape(Var v) const { return nodes_.at(v.id).shape; }
  std::span<const double> value(Var v) const { return nodes_.at(v.id).value; }
  /// Empty until backward() has reached the node.
  std::span<const double> grad(Var v) const { return nodes_.at(v.id).grad; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 and propagates through the tape.
  void backward(Var root);

  /// Adds the gradient of every bound trainable parameter into `grads`.
  void accumulate(Gradients& grads) const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::ptrdiff_t param_index = -1;
    std::function<void(Graph&, const Node&)> backprop;
  };

  Var push(Shape shape, std::vector<double> value, std::initializer_list<Var> inputs);
  Var push(Shape shape, std::vector<double> value, std::span<const Var> inputs);
  std::vector<double>& grad_of(Var v);  // allocates on first use
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }

  std::vector<Node> nodes_;
  bool track_ = true;
};

/// Row-wise softmax of an n x d array with max subtraction.
std::vector<double> softmax_rows(std::span<const double> x, std::size_t n, std::size_t d);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace roiqa::nn
