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

#ifndef SHARPNET_DATA_H_
#define SHARPNET_DATA_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sharpnet/image.h"
#include "sharpnet/tensor.h"

namespace sharpnet {

struct PaletteEntry {
  std::string name;
  std::array<std::uint8_t, 3> color{};
  double ciw = 0.0;

  friend bool operator==(const PaletteEntry&, const PaletteEntry&) = default;
};

// Class index <-> RGB color <-> class importance weight. Entry 0 is the
// background.
class Palette {
 public:
  Palette() = default;
  // Throws kData on duplicate colors or weights outside [0, 1].
  explicit Palette(std::vector<PaletteEntry> entries);

  std::size_t size() const { return entries_.size(); }
  const PaletteEntry& operator[](std::size_t i) const { return entries_.at(i); }
  const std::vector<PaletteEntry>& entries() const { return entries_; }
  std::vector<double> Weights() const;

  // Class index of `color`, or -1 when the color is not in the palette.
  int Lookup(std::uint8_t r, std::uint8_t g, std::uint8_t b) const;

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<PaletteEntry> entries_;
};

// Background plus the nine culvert/sewer defect classes with their
// importance weights. Colors are placeholders.
Palette DefaultPalette();
// First `num_classes` entries of the default palette; colors are generated
// past the tenth class.
Palette DefaultPalette(std::size_t num_classes);

// CSV with header `class_name,r,g,b,ciw`; background row first.
Palette LoadPalette(const std::filesystem::path& path);
Palette ParsePalette(const std::string& csv);
void SavePalette(const std::filesystem::path& path, const Palette& palette);
std::string FormatPalette(const Palette& palette);

// strict: unknown colors throw kData naming the pixel and color.
// lenient: unknown colors decode to background.
ClassMap DecodeMask(const RgbImage& mask, const Palette& palette, bool strict = true);
RgbImage EncodeMask(const ClassMap& mask, const Palette& palette);

// N x H x W x K one-hot targets.
Tensor EncodeOneHot(std::span<const ClassMap> masks, std::size_t num_classes);
// N x H x W x 3 with channels scaled to [0, 1].
Tensor ImagesToTensor(std::span<const RgbImage> images);

struct Sample {
  RgbImage image;
  ClassMap mask;
  std::string id;
};

// Layout: images/<id>.png, masks/<id>.png, palette.csv. Samples sorted by id.
std::vector<Sample> LoadDataset(const std::filesystem::path& root, const Palette& palette,
                                bool strict = true);
void SaveDataset(const std::filesystem::path& root, std::span<const Sample> samples,
                 const Palette& palette);

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then test = round(n * test), val = round(n * (val + test))
// - test, and train takes the remainder.
DatasetSplit SplitDataset(std::size_t sample_count, const SplitSpec& spec);

// Rectangles, vertical bars, diagonal bars and discs (one family per class,
// cycling) over textured noise. Shapes sit on a 2-pixel lattice so the masks
// are exactly representable at half resolution.
std::vector<Sample> GenerateSynthetic(std::size_t count, std::size_t height, std::size_t width,
                                      std::size_t num_classes, std::uint64_t seed);

}  // namespace sharpnet

#endif  // SHARPNET_DATA_H_
