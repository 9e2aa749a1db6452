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

#include "sharpnet/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sharpnet/error.h"

namespace sharpnet {
namespace {

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(Trim(field));
  return fields;
}

std::uint32_t PackColor(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | b;
}

}  // namespace

// ---- palette ----------------------------------------------------------------

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  Require(!entries_.empty(), ErrorCode::kData, "palette has no entries");
  std::set<std::uint32_t> colors;
  for (const PaletteEntry& e : entries_) {
    Require(e.ciw >= 0.0 && e.ciw <= 1.0, ErrorCode::kData,
            "palette weight for '" + e.name + "' is outside [0, 1]");
    Require(colors.insert(PackColor(e.color[0], e.color[1], e.color[2])).second,
            ErrorCode::kData, "palette color for '" + e.name + "' is not unique");
  }
}

std::vector<double> Palette::Weights() const {
  std::vector<double> w;
  for (const PaletteEntry& e : entries_) w.push_back(e.ciw);
  return w;
}

int Palette::Lookup(std::uint8_t r, std::uint8_t g, std::uint8_t b) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& c = entries_[i].color;
    if (c[0] == r && c[1] == g && c[2] == b) return static_cast<int>(i);
  }
  return -1;
}

Palette DefaultPalette() {
  return Palette({
      {"Background", {0, 0, 0}, 0.0},
      {"Water Level", {0, 114, 189}, 0.0310},
      {"Cracks", {217, 83, 25}, 1.0000},
      {"Roots", {119, 172, 48}, 1.0000},
      {"Holes", {126, 47, 142}, 1.0000},
      {"Joint Problems", {237, 177, 32}, 0.6419},
      {"Deformation", {77, 190, 238}, 0.1622},
      {"Fracture", {162, 20, 47}, 0.5100},
      {"Encrustation/Deposits", {255, 255, 255}, 0.3518},
      {"Loose Gasket", {255, 0, 255}, 0.5419},
  });
}

Palette DefaultPalette(std::size_t num_classes) {
  Require(num_classes >= 1, ErrorCode::kData, "palette needs at least one class");
  std::vector<PaletteEntry> entries = DefaultPalette().entries();
  if (num_classes <= entries.size()) {
    entries.resize(num_classes);
  } else {
    for (std::size_t c = entries.size(); c < num_classes; ++c) {
      entries.push_back({"class_" + std::to_string(c),
                         {static_cast<std::uint8_t>(17 * c % 256),
                          static_cast<std::uint8_t>(61 * c % 256),
                          static_cast<std::uint8_t>(101 * c % 256)},
                         1.0});
    }
  }
  return Palette(std::move(entries));
}

Palette ParsePalette(const std::string& csv) {
  std::stringstream in(csv);
  std::string line;
  bool header = true;
  std::vector<PaletteEntry> entries;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line);
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (header) {
      Require(f == std::vector<std::string>{"class_name", "r", "g", "b", "ciw"},
              ErrorCode::kData, "palette header must be 'class_name,r,g,b,ciw'");
      header = false;
      continue;
    }
    Require(f.size() == 5, ErrorCode::kData,
            "palette line " + std::to_string(line_no) + " needs 5 fields");
    PaletteEntry e;
    e.name = f[0];
    for (int i = 0; i < 3; ++i) {
      int v = -1;
      auto [p, ec] = std::from_chars(f[1 + i].data(), f[1 + i].data() + f[1 + i].size(), v);
      Require(ec == std::errc() && p == f[1 + i].data() + f[1 + i].size() && v >= 0 && v <= 255,
              ErrorCode::kData, "palette line " + std::to_string(line_no) + ": bad color");
      e.color[i] = static_cast<std::uint8_t>(v);
    }
    try {
      std::size_t used = 0;
      e.ciw = std::stod(f[4], &used);
      Require(used == f[4].size(), ErrorCode::kData, "trailing characters");
    } catch (const std::logic_error&) {
      Fail(ErrorCode::kData, "palette line " + std::to_string(line_no) + ": bad ciw");
    }
    entries.push_back(std::move(e));
  }
  Require(!header, ErrorCode::kData, "palette file is empty");
  return Palette(std::move(entries));
}

Palette LoadPalette(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParsePalette(ss.str());
}

std::string FormatPalette(const Palette& palette) {
  std::ostringstream out;
  out << "class_name,r,g,b,ciw\n";
  for (const PaletteEntry& e : palette.entries()) {
    char ciw[32];
    auto [end, ec] = std::to_chars(ciw, ciw + sizeof(ciw), e.ciw);
    out << e.name << ',' << int{e.color[0]} << ',' << int{e.color[1]} << ','
        << int{e.color[2]} << ',' << std::string(ciw, end) << '\n';
  }
  return out.str();
}

void SavePalette(const std::filesystem::path& path, const Palette& palette) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path.string());
  out << FormatPalette(palette);
}

// ---- masks ------------------------------------------------------------------

ClassMap DecodeMask(const RgbImage& mask, const Palette& palette, bool strict) {
  ClassMap out(mask.height, mask.width, 0);
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      const std::uint8_t* p = mask.pixel(y, x);
      const int c = palette.Lookup(p[0], p[1], p[2]);
      if (c < 0) {
        Require(!strict, ErrorCode::kData,
                "unknown mask color (" + std::to_string(p[0]) + "," + std::to_string(p[1]) +
                    "," + std::to_string(p[2]) + ") at pixel (x=" + std::to_string(x) +
                    ", y=" + std::to_string(y) + ")");
        continue;
      }
      out(y, x) = c;
    }
  }
  return out;
}

RgbImage EncodeMask(const ClassMap& mask, const Palette& palette) {
  RgbImage out(mask.height, mask.width);
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      const int c = mask(y, x);
      Require(c >= 0 && static_cast<std::size_t>(c) < palette.size(), ErrorCode::kData,
              "class index " + std::to_string(c) + " has no palette color");
      std::copy_n(palette[static_cast<std::size_t>(c)].color.begin(), 3, out.pixel(y, x));
    }
  }
  return out;
}

Tensor EncodeOneHot(std::span<const ClassMap> masks, std::size_t num_classes) {
  Require(!masks.empty(), ErrorCode::kData, "no masks to encode");
  const std::size_t h = masks[0].height, w = masks[0].width;
  Tensor out({masks.size(), h, w, num_classes}, 0.0);
  for (std::size_t n = 0; n < masks.size(); ++n) {
    Require(masks[n].height == h && masks[n].width == w, ErrorCode::kData,
            "masks in a batch must share dims");
    for (std::size_t i = 0; i < h * w; ++i) {
      const int c = masks[n].values[i];
      Require(c >= 0 && static_cast<std::size_t>(c) < num_classes, ErrorCode::kData,
              "mask value " + std::to_string(c) + " out of range");
      out[(n * h * w + i) * num_classes + static_cast<std::size_t>(c)] = 1.0;
    }
  }
  return out;
}

Tensor ImagesToTensor(std::span<const RgbImage> images) {
  Require(!images.empty(), ErrorCode::kData, "no images to convert");
  const std::size_t h = images[0].height, w = images[0].width;
  Tensor out({images.size(), h, w, 3});
  for (std::size_t n = 0; n < images.size(); ++n) {
    Require(images[n].height == h && images[n].width == w, ErrorCode::kData,
            "images in a batch must share dims");
    for (std::size_t i = 0; i < h * w * 3; ++i) {
      out[n * h * w * 3 + i] = images[n].values[i] / 255.0;
    }
  }
  return out;
}

// ---- dataset ----------------------------------------------------------------

std::vector<Sample> LoadDataset(const std::filesystem::path& root, const Palette& palette,
                                bool strict) {
  const auto image_dir = root / "images";
  const auto mask_dir = root / "masks";
  Require(std::filesystem::is_directory(image_dir), ErrorCode::kData,
          "missing directory " + image_dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(image_dir)) {
    if (entry.path().extension() == ".png") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  Require(!ids.empty(), ErrorCode::kData, "dataset " + root.string() + " has no images");

  std::vector<Sample> samples;
  for (const std::string& id : ids) {
    Sample s;
    s.id = id;
    s.image = ReadPng(image_dir / (id + ".png"));
    const auto mask_path = mask_dir / (id + ".png");
    Require(std::filesystem::exists(mask_path), ErrorCode::kData,
            "missing mask " + mask_path.string());
    s.mask = DecodeMask(ReadPng(mask_path), palette, strict);
    Require(s.mask.height == s.image.height && s.mask.width == s.image.width,
            ErrorCode::kData, "image and mask dims differ for sample " + id);
    samples.push_back(std::move(s));
  }
  return samples;
}

void SaveDataset(const std::filesystem::path& root, std::span<const Sample> samples,
                 const Palette& palette) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "masks");
  for (const Sample& s : samples) {
    WritePng(root / "images" / (s.id + ".png"), s.image);
    WritePng(root / "masks" / (s.id + ".png"), EncodeMask(s.mask, palette));
  }
  SavePalette(root / "palette.csv", palette);
}

DatasetSplit SplitDataset(std::size_t sample_count, const SplitSpec& spec) {
  Require(sample_count > 0, ErrorCode::kData, "cannot split an empty dataset");
  Require(sample_count >= 3, ErrorCode::kData, "splitting needs at least 3 samples");
  Require(spec.train >= 0 && spec.val >= 0 && spec.test >= 0 &&
              std::abs(spec.train + spec.val + spec.test - 1.0) < 1e-9,
          ErrorCode::kConfig, "split fractions must be non-negative and sum to 1");

  std::vector<std::size_t> order(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = sample_count - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }

  const double n = static_cast<double>(sample_count);
  const auto n_test = static_cast<std::size_t>(std::llround(n * spec.test));
  const auto n_tail = static_cast<std::size_t>(std::llround(n * (spec.val + spec.test)));
  const std::size_t n_val = n_tail - n_test;
  const std::size_t n_train = sample_count - n_tail;

  DatasetSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return split;
}

}  // namespace sharpnet
