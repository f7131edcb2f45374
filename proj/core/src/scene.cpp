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

#include "roiqa/scene.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "roiqa/random.hpp"

namespace roiqa {

namespace {

using Color = std::array<double, 3>;

enum class Texture { Flat, Stripes, Checker, Smooth };

struct Fill {
  Color color{};
  Texture texture = Texture::Flat;
  double amplitude = 0.0;
  double period = 4.0;
  double angle = 0.0;
  std::vector<double> grid;  // 9 x 9 lattice for smooth textures
};

double color_distance(const Color& a, const Color& b) {
  double d = 0;
  for (int c = 0; c < 3; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(d);
}

Color distinct_color(Rng& rng, const std::vector<Color>& used) {
  Color c{};
  for (int tries = 0; tries < 64; ++tries) {
    for (double& v : c) v = rng.uniform(0.12, 0.88);
    bool ok = true;
    for (const Color& u : used) ok = ok && color_distance(c, u) > 0.3;
    if (ok) break;
  }
  return c;
}

Fill random_fill(Rng& rng, const Color& color) {
  Fill f;
  f.color = color;
  f.texture = static_cast<Texture>(rng.index(4));
  f.amplitude = rng.uniform(0.015, 0.04);
  f.period = rng.uniform(3.0, 8.0);
  f.angle = rng.uniform(0.0, std::numbers::pi);
  f.grid.resize(81);
  for (double& v : f.grid) v = rng.uniform(-1.0, 1.0);
  return f;
}

double texture_value(const Fill& f, double r, double c, std::size_t h, std::size_t w) {
  switch (f.texture) {
    case Texture::Flat:
      return 0.0;
    case Texture::Stripes: {
      const double u = c * std::cos(f.angle) + r * std::sin(f.angle);
      return std::sin(2.0 * std::numbers::pi * u / f.period);
    }
    case Texture::Checker: {
      const auto cell = static_cast<long>(std::max(2.0, std::floor(f.period / 2.0)));
      const long parity = (static_cast<long>(r) / cell + static_cast<long>(c) / cell) % 2;
      return parity == 0 ? 1.0 : -1.0;
    }
    case Texture::Smooth: {
      const double y = r / static_cast<double>(h) * 8.0;
      const double x = c / static_cast<double>(w) * 8.0;
      const auto y0 = static_cast<std::size_t>(std::min(7.0, std::floor(y)));
      const auto x0 = static_cast<std::size_t>(std::min(7.0, std::floor(x)));
      const double fy = y - static_cast<double>(y0), fx = x - static_cast<double>(x0);
      const auto g = [&](std::size_t yy, std::size_t xx) { return f.grid[yy * 9 + xx]; };
      return (1 - fy) * ((1 - fx) * g(y0, x0) + fx * g(y0, x0 + 1)) +
             fy * ((1 - fx) * g(y0 + 1, x0) + fx * g(y0 + 1, x0 + 1));
    }
  }
  return 0.0;
}

}  // namespace

ImageBuffer procedural_scene(std::uint64_t seed, std::size_t height, std::size_t width) {
  if (height < 32 || width < 32) throw Error("procedural_scene: image must be at least 32x32");
  Rng rng(mix_keys(seed, 0x5343454e45ULL));
  const double H = static_cast<double>(height), W = static_cast<double>(width);

  std::vector<Color> used;
  const Color top = distinct_color(rng, used);
  used.push_back(top);
  const Color bottom = distinct_color(rng, used);
  used.push_back(bottom);
  const double horizon = rng.uniform(0.35, 0.65) * H;
  const Fill top_fill = random_fill(rng, top);
  const Fill bottom_fill = random_fill(rng, bottom);

  struct Shape {
    bool disk = false;
    double cy = 0, cx = 0, ry = 0, rx = 0;
    Fill fill;
  };
  std::vector<Shape> shapes(2 + rng.index(3));
  for (Shape& s : shapes) {
    s.disk = rng.bernoulli(0.5);
    s.cy = rng.uniform(0.2, 0.8) * H;
    s.cx = rng.uniform(0.2, 0.8) * W;
    s.ry = rng.uniform(0.12, 0.24) * H;
    s.rx = rng.uniform(0.12, 0.24) * W;
    const Color c = distinct_color(rng, used);
    used.push_back(c);
    s.fill = random_fill(rng, c);
  }

  ImageBuffer img(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double y = static_cast<double>(r) + 0.5, x = static_cast<double>(c) + 0.5;
      const Fill* f = y < horizon ? &top_fill : &bottom_fill;
      double shade = 0.03 * (y / H - 0.5);  // gentle vertical gradient on the backdrop
      for (const Shape& s : shapes) {
        const double dy = (y - s.cy) / s.ry, dx = (x - s.cx) / s.rx;
        const bool inside = s.disk ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside) {
          f = &s.fill;
          shade = 0.0;
        }
      }
      const double t = f->amplitude * texture_value(*f, static_cast<double>(r), static_cast<double>(c),
                                                    height, width);
      for (std::size_t ch = 0; ch < 3; ++ch) img.at(r, c, ch) = f->color[ch] + shade + t;
    }
  }
  img.clamp();
  return img;
}

ImageBuffer gray_card(std::size_t height, std::size_t width) { return ImageBuffer(height, width, 0.5); }

}  // namespace roiqa
