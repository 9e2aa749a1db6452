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

#ifndef SHARPNET_IMAGE_H_
#define SHARPNET_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace sharpnet {

// Row-major single-channel plane.
template <typename T>
struct Plane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> values;

  Plane() = default;
  Plane(std::size_t h, std::size_t w, T fill = T{})
      : height(h), width(w), values(h * w, fill) {}

  T& operator()(std::size_t y, std::size_t x) { return values[y * width + x]; }
  const T& operator()(std::size_t y, std::size_t x) const {
    return values[y * width + x];
  }
  std::size_t size() const { return values.size(); }

  friend bool operator==(const Plane&, const Plane&) = default;
};

using GrayImage = Plane<double>;
// Per-pixel class indices; 0 is background.
using ClassMap = Plane<int>;

// Interleaved 8-bit RGB.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> values;

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w) : height(h), width(w), values(h * w * 3, 0) {}

  std::uint8_t* pixel(std::size_t y, std::size_t x) {
    return &values[(y * width + x) * 3];
  }
  const std::uint8_t* pixel(std::size_t y, std::size_t x) const {
    return &values[(y * width + x) * 3];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Rec.601 luminance (0.299 R + 0.587 G + 0.114 B), scaled to [0, 1].
GrayImage ToGray(const RgbImage& image);

// PNG is the only supported raster format. Gray, palette and alpha inputs
// are expanded/stripped to 8-bit RGB.
RgbImage ReadPng(const std::filesystem::path& path);
void WritePng(const std::filesystem::path& path, const RgbImage& image);

}  // namespace sharpnet

#endif  // SHARPNET_IMAGE_H_
