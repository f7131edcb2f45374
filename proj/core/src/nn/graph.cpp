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

#include "roiqa/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roiqa/types.hpp"

namespace roiqa::nn {

namespace {

void expect(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw Error(std::string(op) + ": " + detail);
}

// Maps a padded coordinate back into [0, n) by mirror reflection without
// repeating the edge sample.
std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

std::vector<double> softmax_rows(std::span<const double> x, std::size_t n, std::size_t d) {
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * d;
    double* oi = out.data() + i * d;
    const double m = *std::max_element(xi, xi + d);
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += (oi[j] = std::exp(xi[j] - m));
    for (std::size_t j = 0; j < d; ++j) oi[j] /= z;
  }
  return out;
}

Graph::Var Graph::push(Shape shape, std::vector<double> value, std::span<const Var> inputs) {
  expect(numel(shape) == value.size(), "graph", "value size does not match " + shape_string(shape));
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  for (Var v : inputs) n.requires_grad = n.requires_grad || nodes_.at(v.id).requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Graph::Var Graph::push(Shape shape, std::vector<double> value, std::initializer_list<Var> inputs) {
  return push(std::move(shape), std::move(value), std::span<const Var>(inputs.begin(), inputs.size()));
}

std::vector<double>& Graph::grad_of(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Graph::Var Graph::constant(Shape shape, std::vector<double> values) {
  return push(std::move(shape), std::move(values), {});
}

Graph::Var Graph::variable(Shape shape, std::vector<double> values) {
  const Var v = push(std::move(shape), std::move(values), {});
  nodes_[v.id].requires_grad = track_;
  return v;
}

Graph::Var Graph::param(const Parameter& p) {
  const auto vals = p.value();
  const Var v = push(p.shape(), std::vector<double>(vals.begin(), vals.end()), {});
  nodes_[v.id].requires_grad = track_ && p.trainable;
  nodes_[v.id].param_index = static_cast<std::ptrdiff_t>(p.index());
  return v;
}

Graph::Var Graph::conv2d(Var x, Var w, std::optional<Var> bias, std::size_t stride,
                         Padding padding) {
  const Shape xs = shape(x);
  const Shape ws = shape(w);
  expect(xs.size() == 3, "conv2d", "input must be C x H x W, got " + shape_string(xs));
  expect(ws.size() == 4 && ws[1] == xs[0] && ws[2] == ws[3] && ws[2] % 2 == 1, "conv2d",
         "weight " + shape_string(ws) + " incompatible with input " + shape_string(xs));
  expect(stride >= 1, "conv2d", "stride must be positive");
  const std::size_t C = xs[0], H = xs[1], W = xs[2], O = ws[0], k = ws[2], p = k / 2;
  if (bias) expect(shape(*bias) == Shape{O}, "conv2d", "bias must have shape [O]");
  expect(padding == Padding::Zero || (H > p && W > p), "conv2d", "reflect padding exceeds input");
  const std::size_t Hp = H + 2 * p, Wp = W + 2 * p;
  const std::size_t Ho = (Hp - k) / stride + 1, Wo = (Wp - k) / stride + 1;

  // Padded input copy; also used by the backward pass.
  std::vector<double> xp(C * Hp * Wp, 0.0);
  {
    const auto xv = value(x);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t yy = 0; yy < Hp; ++yy) {
        for (std::size_t xx = 0; xx < Wp; ++xx) {
          const auto sy = static_cast<std::ptrdiff_t>(yy) - static_cast<std::ptrdiff_t>(p);
          const auto sx = static_cast<std::ptrdiff_t>(xx) - static_cast<std::ptrdiff_t>(p);
          double v = 0.0;
          if (padding == Padding::Reflect) {
            v = xv[(c * H + reflect_index(sy, static_cast<std::ptrdiff_t>(H))) * W +
                   reflect_index(sx, static_cast<std::ptrdiff_t>(W))];
          } else if (sy >= 0 && sx >= 0 && sy < static_cast<std::ptrdiff_t>(H) &&
                     sx < static_cast<std::ptrdiff_t>(W)) {
            v = xv[(c * H + static_cast<std::size_t>(sy)) * W + static_cast<std::size_t>(sx)];
          }
          xp[(c * Hp + yy) * Wp + xx] = v;
        }
      }
    }
  }

  std::vector<double> out(O * Ho * Wo, 0.0);
  const auto wv = value(w);
  for (std::size_t o = 0; o < O; ++o) {
    double* oo = out.data() + o * Ho * Wo;
    if (bias) std::fill(oo, oo + Ho * Wo, value(*bias)[o]);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double wt = wv[((o * C + c) * k + ky) * k + kx];
          for (std::size_t oy = 0; oy < Ho; ++oy) {
            const double* src = xp.data() + (c * Hp + oy * stride + ky) * Wp + kx;
            double* dst = oo + oy * Wo;
            for (std::size_t ox = 0; ox < Wo; ++ox) dst[ox] += wt * src[ox * stride];
          }
        }
      }
    }
  }

  std::vector<Var> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  const Var y = push({O, Ho, Wo}, std::move(out), inputs);
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=, xp = std::move(xp)](Graph& g, const Node& n) {
    const auto& gy = n.grad;
    if (bias && g.needs(*bias)) {
      auto& gb = g.grad_of(*bias);
      for (std::size_t o = 0; o < O; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < Ho * Wo; ++i) s += gy[o * Ho * Wo + i];
        gb[o] += s;
      }
    }
    if (g.needs(w)) {
      auto& gw = g.grad_of(w);
      for (std::size_t o = 0; o < O; ++o) {
        const double* go = gy.data() + o * Ho * Wo;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              double s = 0.0;
              for (std::size_t oy = 0; oy < Ho; ++oy) {
                const double* src = xp.data() + (c * Hp + oy * stride + ky) * Wp + kx;
                const double* gr = go + oy * Wo;
                for (std::size_t ox = 0; ox < Wo; ++ox) s += gr[ox] * src[ox * stride];
              }
              gw[((o * C + c) * k + ky) * k + kx] += s;
            }
          }
        }
      }
    }
    if (g.needs(x)) {
      std::vector<double> gxp(C * Hp * Wp, 0.0);
      const auto wvals = g.value(w);
      for (std::size_t o = 0; o < O; ++o) {
        const double* go = gy.data() + o * Ho * Wo;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const double wt = wvals[((o * C + c) * k + ky) * k + kx];
              for (std::size_t oy = 0; oy < Ho; ++oy) {
                double* dst = gxp.data() + (c * Hp + oy * stride + ky) * Wp + kx;
                const double* gr = go + oy * Wo;
                for (std::size_t ox = 0; ox < Wo; ++ox) dst[ox * stride] += wt * gr[ox];
              }
            }
          }
        }
      }
      auto& gx = g.grad_of(x);
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t yy = 0; yy < Hp; ++yy) {
          for (std::size_t xx = 0; xx < Wp; ++xx) {
            const auto sy = static_cast<std::ptrdiff_t>(yy) - static_cast<std::ptrdiff_t>(p);
            const auto sx = static_cast<std::ptrdiff_t>(xx) - static_cast<std::ptrdiff_t>(p);
            const double v = gxp[(c * Hp + yy) * Wp + xx];
            if (padding == Padding::Reflect) {
              gx[(c * H + reflect_index(sy, static_cast<std::ptrdiff_t>(H))) * W +
                 reflect_index(sx, static_cast<std::ptrdiff_t>(W))] += v;
            } else if (sy >= 0 && sx >= 0 && sy < static_cast<std::ptrdiff_t>(H) &&
                       sx < static_cast<std::ptrdiff_t>(W)) {
              gx[(c * H + static_cast<std::size_t>(sy)) * W + static_cast<std::size_t>(sx)] += v;
            }
          }
        }
      }
    }
  };
  return y;
}

Graph::Var Graph::linear(Var x, Var w, std::optional<Var> bias) {
  const Shape xs = shape(x);
  const Shape ws = shape(w);
  expect(xs.size() == 2 && ws.size() == 2 && ws[1] == xs[1], "linear",
         "weight " + shape_string(ws) + " incompatible with input " + shape_string(xs));
  const std::size_t n = xs[0], in = xs[1], out_dim = ws[0];
  if (bias) expect(shape(*bias) == Shape{out_dim}, "linear", "bias must have shape [out]");
  const auto xv = value(x);
  const auto wv = value(w);
  std::vector<double> out(n * out_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out_dim; ++o) {
      double s = bias ? value(*bias)[o] : 0.0;
      for (std::size_t j = 0; j < in; ++j) s += xv[i * in + j] * wv[o * in + j];
      out[i * out_dim + o] = s;
    }
  }
  std::vector<Var> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  const Var y = push({n, out_dim}, std::move(out), inputs);
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    const auto& gy = node.grad;
    if (bias && g.needs(*bias)) {
      auto& gb = g.grad_of(*bias);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < out_dim; ++o) gb[o] += gy[i * out_dim + o];
    }
    if (g.needs(w)) {
      auto& gw = g.grad_of(w);
      const auto xv2 = g.value(x);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = gy[i * out_dim + o];
          for (std::size_t j = 0; j < in; ++j) gw[o * in + j] += go * xv2[i * in + j];
        }
    }
    if (g.needs(x)) {
      auto& gx = g.grad_of(x);
      const auto wv2 = g.value(w);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = gy[i * out_dim + o];
          for (std::size_t j = 0; j < in; ++j) gx[i * in + j] += go * wv2[o * in + j];
        }
    }
  };
  return y;
}

Graph::Var Graph::attention(Var q, Var k, Var v) {
  const Shape qs = shape(q), ks = shape(k), vs = shape(v);
  expect(qs.size() == 2 && ks.size() == 2 && vs.size() == 2 && qs[1] == ks[1] && ks == vs,
         "attention",
         "shapes " + shape_string(qs) + ", " + shape_string(ks) + ", " + shape_string(vs));
  const std::size_t n = qs[0], m = ks[0], P = qs[1];
  expect(P > 0 && m > 0, "attention", "token dimension and key count must be positive");
  const double inv = 1.0 / std::sqrt(static_cast<double>(P));
  const auto qv = value(q), kv = value(k), vv = value(v);
  std::vector<double> scores(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < P; ++d) s += qv[i * P + d] * kv[j * P + d];
      scores[i * m + j] = s * inv;
    }
  std::vector<double> a = softmax_rows(scores, n, m);
  std::vector<double> out(n * P, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double aij = a[i * m + j];
      for (std::size_t d = 0; d < P; ++d) out[i * P + d] += aij * vv[j * P + d];
    }
  const Var y = push({n, P}, std::move(out), {q, k, v});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=, a = std::move(a)](Graph& g, const Node& node) {
    const auto& gy = node.grad;
    const auto q2 = g.value(q), k2 = g.value(k), v2 = g.value(v);
    std::vector<double> ga(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < P; ++d) s += gy[i * P + d] * v2[j * P + d];
        ga[i * m + j] = s;
      }
    if (g.needs(v)) {
      auto& gv = g.grad_of(v);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double aij = a[i * m + j];
          for (std::size_t d = 0; d < P; ++d) gv[j * P + d] += aij * gy[i * P + d];
        }
    }
    // d(scores), already scaled by 1/sqrt(P).
    std::vector<double> gs(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      double dotp = 0.0;
      for (std::size_t j = 0; j < m; ++j) dotp += a[i * m + j] * ga[i * m + j];
      for (std::size_t j = 0; j < m; ++j)
        gs[i * m + j] = a[i * m + j] * (ga[i * m + j] - dotp) * inv;
    }
    if (g.needs(q)) {
      auto& gq = g.grad_of(q);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double s = gs[i * m + j];
          for (std::size_t d = 0; d < P; ++d) gq[i * P + d] += s * k2[j * P + d];
        }
    }
    if (g.needs(k)) {
      auto& gk = g.grad_of(k);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double s = gs[i * m + j];
          for (std::size_t d = 0; d < P; ++d) gk[j * P + d] += s * q2[i * P + d];
        }
    }
  };
  return y;
}

Graph::Var Graph::softmax(Var x) {
  const Shape xs = shape(x);
  expect(xs.size() == 2, "softmax", "input must be n x d, got " + shape_string(xs));
  const std::size_t n = xs[0], d = xs[1];
  const Var y = push(xs, softmax_rows(value(x), n, d), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t i = 0; i < n; ++i) {
      double dotp = 0.0;
      for (std::size_t j = 0; j < d; ++j) dotp += node.value[i * d + j] * node.grad[i * d + j];
      for (std::size_t j = 0; j < d; ++j)
        gx[i * d + j] += node.value[i * d + j] * (node.grad[i * d + j] - dotp);
    }
  };
  return y;
}

Graph::Var Graph::gelu(Var x) {
  const auto xv = value(x);
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double u = xv[i];
    out[i] = 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluA * u * u * u)));
  }
  const Var y = push(shape(x), std::move(out), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    const auto xs = g.value(x);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double u = xs[i];
      const double t = std::tanh(kGeluC * (u + kGeluA * u * u * u));
      const double d =
          0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * u * u);
      gx[i] += d * node.grad[i];
    }
  };
  return y;
}

Graph::Var Graph::add(Var a, Var b) {
  const Var xs[] = {a, b};
  return add_n(xs);
}

Graph::Var Graph::add_n(std::span<const Var> xs) {
  expect(!xs.empty(), "add", "no operands");
  const Shape s = shape(xs[0]);
  std::vector<double> out(numel(s), 0.0);
  for (Var v : xs) {
    expect(shape(v) == s, "add", shape_string(shape(v)) + " vs " + shape_string(s));
    const auto vv = value(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += vv[i];
  }
  const Var y = push(s, std::move(out), xs);
  if (!nodes_[y.id].requires_grad) return y;
  std::vector<Var> ins(xs.begin(), xs.end());
  nodes_[y.id].backprop = [ins](Graph& g, const Node& node) {
    for (Var v : ins) {
      if (!g.needs(v)) continue;
      auto& gv = g.grad_of(v);
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += node.grad[i];
    }
  };
  return y;
}

Graph::Var Graph::scale(Var x, double factor) {
  const auto xv = value(x);
  std::vector<double> out(xv.begin(), xv.end());
  for (double& v : out) v *= factor;
  const Var y = push(shape(x), std::move(out), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * node.grad[i];
  };
  return y;
}

Graph::Var Graph::channel_affine(Var x, Var gamma, Var beta) {
  const Shape xs = shape(x);
  expect(xs.size() == 3 && shape(gamma) == Shape{xs[0]} && shape(beta) == Shape{xs[0]},
         "channel_affine", "input " + shape_string(xs));
  const std::size_t C = xs[0], hw = xs[1] * xs[2];
  const auto xv = value(x), gv = value(gamma), bv = value(beta);
  std::vector<double> out(C * hw);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < hw; ++i) out[c * hw + i] = gv[c] * xv[c * hw + i] + bv[c];
  const Var y = push(xs, std::move(out), {x, gamma, beta});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    const auto x2 = g.value(x);
    const auto g2 = g.value(gamma);
    if (g.needs(gamma) || g.needs(beta)) {
      std::vector<double> sg(C, 0.0), sb(C, 0.0);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < hw; ++i) {
          sg[c] += node.grad[c * hw + i] * x2[c * hw + i];
          sb[c] += node.grad[c * hw + i];
        }
      if (g.needs(gamma)) {
        auto& gg = g.grad_of(gamma);
        for (std::size_t c = 0; c < C; ++c) gg[c] += sg[c];
      }
      if (g.needs(beta)) {
        auto& gb = g.grad_of(beta);
        for (std::size_t c = 0; c < C; ++c) gb[c] += sb[c];
      }
    }
    if (g.needs(x)) {
      auto& gx = g.grad_of(x);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < hw; ++i) gx[c * hw + i] += g2[c] * node.grad[c * hw + i];
    }
  };
  return y;
}

Graph::Var Graph::to_tokens(Var x) {
  const Shape xs = shape(x);
  expect(xs.size() == 3, "to_tokens", "input must be C x H x W, got " + shape_string(xs));
  const std::size_t C = xs[0], hw = xs[1] * xs[2];
  const auto xv = value(x);
  std::vector<double> out(C * hw);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < hw; ++i) out[i * C + c] = xv[c * hw + i];
  const Var y = push({hw, C}, std::move(out), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < hw; ++i) gx[c * hw + i] += node.grad[i * C + c];
  };
  return y;
}

Graph::Var Graph::weighted_spatial_mean(Var x, std::span<const double> weights) {
  const Shape xs = shape(x);
  expect(xs.size() == 3 && weights.size() == xs[1] * xs[2], "weighted_spatial_mean",
         "weights do not match input " + shape_string(xs));
  double total = 0.0;
  for (double w : weights) {
    expect(w >= 0.0, "weighted_spatial_mean", "negative weight");
    total += w;
  }
  expect(total > 0.0, "weighted_spatial_mean", "weights sum to zero");
  const std::size_t C = xs[0], hw = xs[1] * xs[2];
  const auto xv = value(x);
  std::vector<double> out(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += weights[i] * xv[c * hw + i];
    out[c] = s / total;
  }
  std::vector<double> norm(weights.begin(), weights.end());
  for (double& w : norm) w /= total;
  const Var y = push({1, C}, std::move(out), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=, norm = std::move(norm)](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < hw; ++i) gx[c * hw + i] += norm[i] * node.grad[c];
  };
  return y;
}

Graph::Var Graph::spatial_mean(Var x) {
  const Shape xs = shape(x);
  expect(xs.size() == 3, "spatial_mean", "input must be C x H x W, got " + shape_string(xs));
  const std::vector<double> w(xs[1] * xs[2], 1.0);
  return weighted_spatial_mean(x, w);
}

Graph::Var Graph::mean_rows(Var x) {
  const Shape xs = shape(x);
  expect(xs.size() == 2 && xs[0] > 0, "mean_rows", "input must be n x d, got " + shape_string(xs));
  const std::size_t n = xs[0], d = xs[1];
  const auto xv = value(x);
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += xv[i * d + j];
  for (double& v : out) v /= static_cast<double>(n);
  const Var y = push({1, d}, std::move(out), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) gx[i * d + j] += node.grad[j] * inv;
  };
  return y;
}

Graph::Var Graph::concat_cols(std::span<const Var> xs) {
  expect(!xs.empty(), "concat_cols", "no operands");
  std::vector<double> out;
  std::vector<std::size_t> widths;
  for (Var v : xs) {
    const Shape& s = shape(v);
    expect(s.size() == 2 && s[0] == 1, "concat_cols", "operands must be 1 x d");
    widths.push_back(s[1]);
    const auto vv = value(v);
    out.insert(out.end(), vv.begin(), vv.end());
  }
  const std::size_t total = out.size();
  const Var y = push({1, total}, std::move(out), xs);
  if (!nodes_[y.id].requires_grad) return y;
  std::vector<Var> ins(xs.begin(), xs.end());
  nodes_[y.id].backprop = [ins, widths](Graph& g, const Node& node) {
    std::size_t off = 0;
    for (std::size_t t = 0; t < ins.size(); ++t) {
      if (g.needs(ins[t])) {
        auto& gv = g.grad_of(ins[t]);
        for (std::size_t j = 0; j < widths[t]; ++j) gv[j] += node.grad[off + j];
      }
      off += widths[t];
    }
  };
  return y;
}

Graph::Var Graph::row(Var x, std::size_t index) {
  const Shape xs = shape(x);
  expect(xs.size() == 2 && index < xs[0], "row",
         "index " + std::to_string(index) + " outside " + shape_string(xs));
  const std::size_t d = xs[1];
  const auto xv = value(x);
  const Var y = push({1, d}, std::vector<double>(xv.begin() + index * d, xv.begin() + (index + 1) * d),
                     {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t j = 0; j < d; ++j) gx[index * d + j] += node.grad[j];
  };
  return y;
}

Graph::Var Graph::reshape(Var x, Shape s) {
  expect(numel(s) == numel(shape(x)), "reshape",
         shape_string(shape(x)) + " -> " + shape_string(s));
  const auto xv = value(x);
  const Var y = push(std::move(s), std::vector<double>(xv.begin(), xv.end()), {x});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += node.grad[i];
  };
  return y;
}

Graph::Var Graph::sum(Var x) {
  const std::vector<double> w(numel(shape(x)), 1.0);
  return dot(x, w);
}

Graph::Var Graph::dot(Var x, std::span<const double> weights) {
  const auto xv = value(x);
  expect(weights.size() == xv.size(), "dot", "weights do not match " + shape_string(shape(x)));
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += weights[i] * xv[i];
  const Var y = push({1}, {s}, {x});
  if (!nodes_[y.id].requires_grad) return y;
  std::vector<double> w(weights.begin(), weights.end());
  nodes_[y.id].backprop = [x, w = std::move(w)](Graph& g, const Node& node) {
    auto& gx = g.grad_of(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += w[i] * node.grad[0];
  };
  return y;
}

Graph::Var Graph::cross_entropy(Var logits, std::size_t r, std::size_t target) {
  const Shape ls = shape(logits);
  expect(ls.size() == 2 && r < ls[0] && target < ls[1], "cross_entropy",
         "row " + std::to_string(r) + " / target " + std::to_string(target) + " outside " +
             shape_string(ls));
  const std::size_t K = ls[1];
  const auto lv = value(logits);
  std::vector<double> p = softmax_rows(lv.subspan(r * K, K), 1, K);
  const double m = *std::max_element(lv.begin() + r * K, lv.begin() + (r + 1) * K);
  double z = 0.0;
  for (std::size_t j = 0; j < K; ++j) z += std::exp(lv[r * K + j] - m);
  const double loss = std::log(z) + m - lv[r * K + target];
  const Var y = push({1}, {loss}, {logits});
  if (!nodes_[y.id].requires_grad) return y;
  nodes_[y.id].backprop = [=, p = std::move(p)](Graph& g, const Node& node) {
    auto& gl = g.grad_of(logits);
    for (std::size_t j = 0; j < K; ++j)
      gl[r * K + j] += node.grad[0] * (p[j] - (j == target ? 1.0 : 0.0));
  };
  return y;
}

Graph::Var Graph::bce_with_logits(Var logits, std::span<const double> targets) {
  const auto lv = value(logits);
  expect(targets.size() == lv.size(), "bce_with_logits",
         "targets do not match " + shape_string(shape(logits)));
  double loss = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double z = lv[i], t = targets[i];
    expect(t >= 0.0 && t <= 1.0, "bce_with_logits", "target outside [0,1]");
    // max(z,0) - z t + log(1 + exp(-|z|))
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  const Var y = push({1}, {loss}, {logits});
  if (!nodes_[y.id].requires_grad) return y;
  std::vector<double> t(targets.begin(), targets.end());
  nodes_[y.id].backprop = [logits, t = std::move(t)](Graph& g, const Node& node) {
    auto& gl = g.grad_of(logits);
    const auto l2 = g.value(logits);
    for (std::size_t i = 0; i < gl.size(); ++i) gl[i] += node.grad[0] * (sigmoid(l2[i]) - t[i]);
  };
  return y;
}

void Graph::backward(Var root) {
  expect(root.id < nodes_.size(), "backward", "unknown node");
  expect(nodes_[root.id].value.size() == 1, "backward", "root must be a scalar");
  for (Node& n : nodes_) n.grad.clear();
  grad_of(root)[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.grad.empty() || !n.backprop) continue;
    n.backprop(*this, n);
  }
}

void Graph::accumulate(Gradients& grads) const {
  for (const Node& n : nodes_) {
    if (n.param_index < 0 || n.grad.empty() || !n.requires_grad) continue;
    auto dst = grads[static_cast<std::size_t>(n.param_index)];
    expect(dst.size() == n.grad.size(), "accumulate", "gradient buffer size mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
  }
}

}  // namespace roiqa::nn
