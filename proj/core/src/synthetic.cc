// Copyright 2026 The sharpnet Authors. All Rights Reserved.
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

#include <algorithm>
#include <cmath>
#include <random>

#include "sharpnet/data.h"
#include "sharpnet/error.h"

namespace sharpnet {
namespace {

enum class Structure { kRectangle, kVerticalBars, kDiagonalBars, kDisc };

Structure StructureForClass(std::size_t c) { return static_cast<Structure>((c - 1) % 4); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform integer in [lo, hi].
  int Int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Paints one structure of class `c` into the half-resolution label grid.
void Paint(ClassMap& grid, std::size_t c, Rng& rng) {
  const int h = static_cast<int>(grid.height), w = static_cast<int>(grid.width);
  const int label = static_cast<int>(c);
  auto set = [&](int y, int x) {
    if (y >= 0 && y < h && x >= 0 && x < w) grid(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = label;
  };
  const int unit = std::max(2, std::min(h, w) / 8);
  switch (StructureForClass(c)) {
    case Structure::kRectangle: {
      const int rh = rng.Int(unit, 2 * unit), rw = rng.Int(unit, 2 * unit);
      const int y0 = rng.Int(0, h - rh), x0 = rng.Int(0, w - rw);
      for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x) set(y, x);
      break;
    }
    case Structure::kVerticalBars: {
      const int bars = rng.Int(2, 3);
      const int len = rng.Int(2 * unit, 3 * unit);
      const int span = bars * 2 - 1;
      const int y0 = rng.Int(0, h - len), x0 = rng.Int(0, w - span);
      for (int b = 0; b < bars; ++b)
        for (int y = y0; y < y0 + len; ++y) set(y, x0 + 2 * b);
      break;
    }
    case Structure::kDiagonalBars: {
      const int bars = rng.Int(2, 3);
      const int len = rng.Int(2 * unit, 3 * unit);
      const int y0 = rng.Int(0, h - len), x0 = rng.Int(0, w - len - 2 * bars);
      for (int b = 0; b < bars; ++b)
        for (int t = 0; t < len; ++t) set(y0 + t, x0 + t + 3 * b);
      break;
    }
    case Structure::kDisc: {
      const int r = rng.Int(unit / 2 + 1, unit);
      const int cy = rng.Int(r, h - r - 1), cx = rng.Int(r, w - r - 1);
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) set(y, x);
      break;
    }
  }
}

}  // namespace

std::vector<Sample> GenerateSynthetic(std::size_t count, std::size_t height, std::size_t width,
                                      std::size_t num_classes, std::uint64_t seed) {
  Require(num_classes >= 2, ErrorCode::kConfig, "synthetic data needs K >= 2");
  Require(height >= 16 && width >= 16 && height % 2 == 0 && width % 2 == 0, ErrorCode::kConfig,
          "synthetic dims must be even and at least 16");
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    ClassMap grid(height / 2, width / 2, 0);
    // Every foreground class appears once per image, in random order.
    std::vector<std::size_t> order;
    for (std::size_t c = 1; c < num_classes; ++c) order.push_back(c);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.Int(0, static_cast<int>(i) - 1))]);
    }
    for (std::size_t c : order) Paint(grid, c, rng);

    Sample s;
    s.id = "synthetic_" + std::to_string(n);
    s.mask = ClassMap(height, width, 0);
    s.image = RgbImage(height, width);
    // Low-frequency shading plus per-pixel noise on the background; all
    // foreground classes share one intensity so only structure separates them.
    const double phase_y = rng.Unit() * 6.283185307179586;
    const double phase_x = rng.Unit() * 6.283185307179586;
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const int label = grid(y / 2, x / 2);
        s.mask(y, x) = label;
        const double shade = 12.0 * std::sin(0.21 * static_cast<double>(y) + phase_y) *
                             std::cos(0.17 * static_cast<double>(x) + phase_x);
        const double noise = (rng.Unit() - 0.5) * 40.0;
        const double base = label == 0 ? 70.0 + shade : 180.0;
        const auto v = static_cast<std::uint8_t>(std::clamp(base + noise, 0.0, 255.0));
        std::uint8_t* p = s.image.pixel(y, x);
        p[0] = p[1] = p[2] = v;
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace sharpnet
