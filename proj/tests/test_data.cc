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
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sharpnet/data.h"
#include "test_util.h"

namespace sharpnet {
namespace {

using testing::CodeOf;
using testing::RandomClassMap;

Palette TwoColor() {
  return Palette({{"bg", {0, 0, 0}, 0.0}, {"crack", {255, 0, 0}, 1.0}});
}

RgbImage Paint(const ClassMap& mask, const Palette& palette) {
  RgbImage img(mask.height, mask.width);
  for (std::size_t y = 0; y < mask.height; ++y)
    for (std::size_t x = 0; x < mask.width; ++x) {
      const auto& c = palette[static_cast<std::size_t>(mask(y, x))].color;
      std::copy(c.begin(), c.end(), img.pixel(y, x));
    }
  return img;
}

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sharpnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Palette, ParseCsv) {
  const Palette p = ParsePalette(
      "class_name,r,g,b,ciw\n"
      "Background,0,0,0,0\n"
      "Cracks, 217, 83, 25, 1.0\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1].name, "Cracks");
  EXPECT_EQ(p[1].color, (std::array<std::uint8_t, 3>{217, 83, 25}));
  EXPECT_EQ(p[1].ciw, 1.0);
  EXPECT_EQ(p.Lookup(217, 83, 25), 1);
  EXPECT_EQ(p.Lookup(1, 2, 3), -1);
}

TEST(Palette, FormatRoundTrip) {
  const Palette p = DefaultPalette();
  EXPECT_EQ(ParsePalette(FormatPalette(p)), p);
}

TEST(Palette, FileRoundTrip) {
  const auto dir = TempDir("palette");
  SavePalette(dir / "palette.csv", DefaultPalette(4));
  EXPECT_EQ(LoadPalette(dir / "palette.csv"), DefaultPalette(4));
  std::filesystem::remove_all(dir);
}

TEST(Palette, InvalidInputRejected) {
  EXPECT_EQ(CodeOf([] { ParsePalette("name,r,g,b\n"); }), ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { ParsePalette("class_name,r,g,b,ciw\nbg,0,0,0,0\nx,0,0,0,1\n"); }),
            ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { ParsePalette("class_name,r,g,b,ciw\nbg,0,0,300,0\n"); }),
            ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { ParsePalette("class_name,r,g,b,ciw\nbg,0,0,0,1.5\n"); }),
            ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { ParsePalette(""); }), ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { LoadPalette("/nonexistent/palette.csv"); }), ErrorCode::kIo);
}

TEST(Palette, DefaultsExtendPastTen) {
  const Palette p = DefaultPalette(14);
  EXPECT_EQ(p.size(), 14u);
  EXPECT_EQ(p[2].name, "Cracks");
}

TEST(DecodeMask, TwoColorExact) {
  const Palette p = TwoColor();
  RgbImage img(2, 2);
  img.pixel(0, 1)[0] = 255;
  img.pixel(1, 0)[0] = 255;
  const ClassMap m = DecodeMask(img, p);
  EXPECT_EQ(m.values, (std::vector<int>{0, 1, 1, 0}));
}

TEST(DecodeMask, MatchesLookupOracle) {
  std::mt19937_64 rng(21);
  const Palette p = DefaultPalette();
  for (int trial = 0; trial < 20; ++trial) {
    const ClassMap truth = RandomClassMap(9, 13, static_cast<int>(p.size()), rng);
    const RgbImage img = Paint(truth, p);
    const ClassMap decoded = DecodeMask(img, p);
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) {
        const std::uint8_t* px = img.pixel(y, x);
        int oracle = -1;
        for (std::size_t c = 0; c < p.size(); ++c)
          if (std::equal(px, px + 3, p[c].color.begin())) oracle = static_cast<int>(c);
        ASSERT_EQ(decoded(y, x), oracle);
      }
  }
}

TEST(DecodeMask, EncodeRoundTrip) {
  std::mt19937_64 rng(22);
  const Palette p = DefaultPalette(6);
  const ClassMap m = RandomClassMap(17, 11, 6, rng);
  EXPECT_EQ(DecodeMask(EncodeMask(m, p), p), m);
}

TEST(DecodeMask, UnknownColorStrictAndLenient) {
  const Palette p = TwoColor();
  RgbImage img(2, 2);
  img.pixel(1, 1)[1] = 9;
  EXPECT_EQ(CodeOf([&] { DecodeMask(img, p, true); }), ErrorCode::kData);
  const ClassMap m = DecodeMask(img, p, false);
  EXPECT_EQ(m(1, 1), 0);
}

TEST(DecodeMask, EncodeRejectsOutOfRangeIndex) {
  ClassMap m(1, 2, 0);
  m(0, 1) = 2;
  EXPECT_EQ(CodeOf([&] { EncodeMask(m, TwoColor()); }), ErrorCode::kData);
}

TEST(OneHot, Layout) {
  ClassMap m(1, 3, 0);
  m(0, 1) = 2;
  m(0, 2) = 1;
  const std::vector<ClassMap> masks{m};
  const Tensor t = EncodeOneHot(masks, 3);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 3, 3}));
  EXPECT_EQ(std::vector<double>(t.values().begin(), t.values().end()),
            (std::vector<double>{1, 0, 0, 0, 0, 1, 0, 1, 0}));
}

TEST(OneHot, OutOfRangeRejected) {
  ClassMap m(1, 1, 3);
  const std::vector<ClassMap> masks{m};
  EXPECT_EQ(CodeOf([&] { EncodeOneHot(masks, 3); }), ErrorCode::kData);
}

TEST(ImagesToTensor, ScalesToUnit) {
  RgbImage img(1, 1);
  img.pixel(0, 0)[0] = 255;
  img.pixel(0, 0)[2] = 51;
  const std::vector<RgbImage> images{img};
  const Tensor t = ImagesToTensor(images);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 1, 3}));
  EXPECT_EQ(t[0], 1.0);
  EXPECT_EQ(t[1], 0.0);
  EXPECT_EQ(t[2], 0.2);
}

void ExpectPartition(const DatasetSplit& s, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(n);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
}

TEST(Split, HundredIsSeventyFifteenFifteen) {
  const DatasetSplit s = SplitDataset(100, {});
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.val.size(), 15u);
  EXPECT_EQ(s.test.size(), 15u);
  ExpectPartition(s, 100);
}

TEST(Split, TenIsSevenOneTwo) {
  const DatasetSplit s = SplitDataset(10, {});
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test.size(), 2u);
  ExpectPartition(s, 10);
}

TEST(Split, SizeLawAndPartitionForManyCounts) {
  for (std::size_t n = 3; n <= 200; ++n) {
    const DatasetSplit s = SplitDataset(n, {});
    const auto test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.15));
    const auto val_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.30));
    EXPECT_EQ(s.test.size(), test) << n;
    EXPECT_EQ(s.val.size(), val_test - test) << n;
    ExpectPartition(s, n);
  }
}

TEST(Split, SeedDeterminism) {
  SplitSpec spec;
  spec.seed = 5;
  const DatasetSplit a = SplitDataset(40, spec);
  const DatasetSplit b = SplitDataset(40, spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  spec.seed = 6;
  EXPECT_NE(SplitDataset(40, spec).train, a.train);
}

TEST(Split, TooFewSamplesRejected) {
  EXPECT_EQ(CodeOf([] { SplitDataset(0, {}); }), ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { SplitDataset(2, {}); }), ErrorCode::kData);
}

TEST(Synthetic, GeneratorContract) {
  const auto samples = GenerateSynthetic(8, 64, 64, 4, 7);
  ASSERT_EQ(samples.size(), 8u);
  std::set<int> classes;
  for (const Sample& s : samples) {
    EXPECT_EQ(s.image.height, 64u);
    EXPECT_EQ(s.image.width, 64u);
    EXPECT_EQ(s.mask.height, 64u);
    EXPECT_EQ(s.mask.width, 64u);
    for (int v : s.mask.values) {
      ASSERT_GE(v, 0);
      ASSERT_LT(v, 4);
      classes.insert(v);
    }
  }
  EXPECT_EQ(classes.size(), 4u);
}

TEST(Synthetic, SameSeedBitIdentical) {
  const auto a = GenerateSynthetic(4, 32, 32, 5, 11);
  const auto b = GenerateSynthetic(4, 32, 32, 5, 11);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].mask, b[i].mask);
    EXPECT_EQ(a[i].id, b[i].id);
  }
  EXPECT_NE(GenerateSynthetic(1, 32, 32, 5, 12)[0].image, a[0].image);
}

TEST(Synthetic, BackgroundDominates) {
  const auto samples = GenerateSynthetic(8, 64, 64, 4, 7);
  std::size_t background = 0, total = 0;
  for (const Sample& s : samples) {
    background += static_cast<std::size_t>(std::count(s.mask.values.begin(), s.mask.values.end(), 0));
    total += s.mask.size();
  }
  EXPECT_GE(static_cast<double>(background) / static_cast<double>(total), 0.60);
}

TEST(Synthetic, InvalidArgumentsRejected) {
  EXPECT_EQ(CodeOf([] { GenerateSynthetic(1, 64, 64, 1, 0); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { GenerateSynthetic(1, 63, 64, 4, 0); }), ErrorCode::kConfig);
}

TEST(Png, RoundTrip) {
  const auto dir = TempDir("png");
  std::mt19937_64 rng(23);
  RgbImage img(7, 5);
  for (auto& v : img.values) v = static_cast<std::uint8_t>(rng() & 0xFF);
  WritePng(dir / "x.png", img);
  EXPECT_EQ(ReadPng(dir / "x.png"), img);
  std::filesystem::remove_all(dir);
}

TEST(Png, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { ReadPng("/nonexistent/x.png"); }), ErrorCode::kIo);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = TempDir("dataset");
  const auto samples = GenerateSynthetic(3, 32, 32, 4, 9);
  const Palette p = DefaultPalette(4);
  SaveDataset(dir, samples, p);
  const auto loaded = LoadDataset(dir, p);
  ASSERT_EQ(loaded.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(loaded[i].id, samples[i].id);
    EXPECT_EQ(loaded[i].image, samples[i].image);
    EXPECT_EQ(loaded[i].mask, samples[i].mask);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sharpnet
