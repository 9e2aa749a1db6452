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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sharpnet/haar.h"
#include "oracles.h"
#include "test_util.h"

namespace sharpnet {
namespace {

using oracle::DenseOracle;
using oracle::HaarWeight;
using oracle::LoopRectSum;
using testing::CodeOf;
using testing::RandomGray;

// 8-bit style intensities: every partial sum is an exact double.
GrayImage RandomIntegerGray(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, 255);
  GrayImage img(h, w);
  for (double& v : img.values) v = dist(rng);
  return img;
}

std::vector<HaarKernel> AllFamilies() {
  return {HaarKernel::Parse("vedge:4x2"), HaarKernel::Parse("hedge:4x4"),
          HaarKernel::Parse("vline:8x4"), HaarKernel::Parse("hline:16x4"),
          HaarKernel::Parse("diag:4x4"),  HaarKernel::Parse("hline:4x16"),
          HaarKernel::Parse("vedge:8x8"), HaarKernel::Parse("diag:8x2")};
}

TEST(IntegralImage, AllOnesTwoByTwo) {
  const IntegralImage ii(GrayImage(2, 2, 1.0));
  const double expected[3][3] = {{0, 0, 0}, {0, 1, 2}, {0, 2, 4}};
  for (std::size_t y = 0; y < 3; ++y)
    for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(ii.at(y, x), expected[y][x]);
}

TEST(IntegralImage, SinglePixel) {
  const IntegralImage ii(GrayImage(1, 1, 0.375));
  EXPECT_EQ(ii.RectSum(0, 0, 1, 1), 0.375);
}

TEST(IntegralImage, RandomRectanglesEqualLoopSums) {
  std::mt19937_64 rng(1);
  const GrayImage img = RandomIntegerGray(16, 16, rng);
  const IntegralImage ii(img);
  EXPECT_EQ(ii.RectSum(0, 0, 16, 16), LoopRectSum(img, 0, 0, 16, 16));
  std::uniform_int_distribution<std::size_t> pos(0, 15);
  for (int q = 0; q < 1000; ++q) {
    const std::size_t x = pos(rng), y = pos(rng);
    const std::size_t w = 1 + pos(rng) % (16 - x), h = 1 + pos(rng) % (16 - y);
    ASSERT_EQ(ii.RectSum(x, y, w, h), LoopRectSum(img, x, y, w, h));
  }
}

TEST(IntegralImage, Errors) {
  EXPECT_EQ(CodeOf([] { IntegralImage ii{GrayImage()}; }), ErrorCode::kInvalidShape);
  const IntegralImage ii(GrayImage(4, 4, 1.0));
  EXPECT_EQ(CodeOf([&] { ii.RectSum(0, 0, 0, 2); }), ErrorCode::kInvalidShape);
  EXPECT_EQ(CodeOf([&] { ii.RectSum(2, 2, 3, 1); }), ErrorCode::kInvalidShape);
}

TEST(HaarKernel, ParseAndFormat) {
  const HaarKernel k = HaarKernel::Parse("vedge:4x2:x2");
  EXPECT_EQ(k.family, HaarFamily::kVerticalEdge);
  EXPECT_EQ(k.width, 4u);
  EXPECT_EQ(k.height, 2u);
  EXPECT_EQ(k.cascade_depth, 2);
  EXPECT_EQ(k.ToString(), "vedge:4x2:x2");
  EXPECT_EQ(HaarKernel::Parse("diag:4x4").ToString(), "diag:4x4");
}

TEST(HaarKernel, RejectsInvalidWindows) {
  for (const char* spec : {"vedge:3x2", "vline:2x4", "hline:4x2", "diag:1x4", "blob:4x4",
                           "vedge:4x2:x3", "vedge:4", "vedge:0x2"}) {
    EXPECT_EQ(CodeOf([&] { HaarKernel::Parse(spec); }), ErrorCode::kConfig) << spec;
  }
}

TEST(HaarKernel, DefaultBank) {
  const std::vector<HaarKernel> k = DefaultKernels();
  ASSERT_EQ(k.size(), 5u);
  EXPECT_EQ(k[0].ToString(), "vedge:4x2");
  EXPECT_EQ(k[1].ToString(), "hedge:4x4");
  EXPECT_EQ(k[2].ToString(), "vline:8x4");
  EXPECT_EQ(k[3].ToString(), "hline:16x4");
  EXPECT_EQ(k[4].ToString(), "diag:4x4");
}

TEST(HaarResponse, VerticalEdgeOnStep) {
  GrayImage img(8, 8, 0.0);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 4; ++x) img(y, x) = 1.0;
  EXPECT_EQ(HaarResponse(IntegralImage(img), HaarKernel::Parse("vedge:4x2"), 2, 3), 4.0);
}

TEST(HaarResponse, DiagonalOnCheckerboard) {
  GrayImage img(4, 4, 0.0);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) img(y, x) = (y < 2) == (x < 2) ? 1.0 : 0.0;
  EXPECT_EQ(HaarResponse(IntegralImage(img), HaarKernel::Parse("diag:4x4"), 0, 0), 8.0);
}

TEST(HaarResponse, ZeroOnConstantImages) {
  for (const HaarKernel& k : AllFamilies()) {
    const IntegralImage ii(GrayImage(16, 16, 0.7));
    for (std::size_t y = 0; y + k.height <= 16; ++y)
      for (std::size_t x = 0; x + k.width <= 16; ++x)
        EXPECT_NEAR(HaarResponse(ii, k, x, y), 0.0, 1e-12) << k.ToString();
    const FeatureMap map = ApplyHaarFilter(GrayImage(16, 16, 0.7), k);
    for (double v : map.response.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(HaarResponse, EdgeFamiliesAreMirrorAntisymmetric) {
  std::mt19937_64 rng(2);
  const GrayImage img = RandomIntegerGray(12, 16, rng);
  GrayImage mirror_x(12, 16), mirror_y(12, 16);
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      mirror_x(y, 15 - x) = img(y, x);
      mirror_y(11 - y, x) = img(y, x);
    }
  const IntegralImage ii(img), iix(mirror_x), iiy(mirror_y);
  const HaarKernel v = HaarKernel::Parse("vedge:4x2");
  const HaarKernel h = HaarKernel::Parse("hedge:4x4");
  for (std::size_t y = 0; y + 4 <= 12; ++y)
    for (std::size_t x = 0; x + 4 <= 16; ++x) {
      EXPECT_EQ(HaarResponse(iix, v, 16 - x - 4, y), -HaarResponse(ii, v, x, y));
      EXPECT_EQ(HaarResponse(iiy, h, x, 12 - y - 4), -HaarResponse(ii, h, x, y));
    }
}

TEST(HaarResponse, WindowOverflow) {
  const IntegralImage ii(GrayImage(4, 4, 1.0));
  EXPECT_EQ(CodeOf([&] { HaarResponse(ii, HaarKernel::Parse("vline:8x4"), 0, 0); }),
            ErrorCode::kInvalidShape);
}

TEST(DenseResponse, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  for (const HaarKernel& k : AllFamilies()) {
    const GrayImage img = RandomIntegerGray(16, 16, rng);
    EXPECT_EQ(DenseResponse(img, k), DenseOracle(img, k)) << k.ToString();
  }
}

TEST(DenseResponse, InteriorEqualsWindowResponse) {
  std::mt19937_64 rng(4);
  for (const HaarKernel& k : AllFamilies()) {
    const GrayImage img = RandomGray(16, 16, rng);
    const GrayImage dense = DenseResponse(img, k);
    const IntegralImage ii(img);
    for (std::size_t y = k.height / 2; y + k.height - k.height / 2 <= 16; ++y)
      for (std::size_t x = k.width / 2; x + k.width - k.width / 2 <= 16; ++x)
        EXPECT_NEAR(dense(y, x), HaarResponse(ii, k, x - k.width / 2, y - k.height / 2), 1e-12);
  }
}

TEST(ApplyHaarFilter, DimsAndRange) {
  std::mt19937_64 rng(5);
  const GrayImage img = RandomGray(12, 20, rng);
  const FeatureMap map = ApplyHaarFilter(img, HaarKernel::Parse("hline:16x4"));
  EXPECT_EQ(map.response.height, 12u);
  EXPECT_EQ(map.response.width, 20u);
  for (double v : map.response.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const GrayImage raw = DenseResponse(img, HaarKernel::Parse("hline:16x4"));
  const GrayImage back = map.Denormalize();
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(back.values[i], raw.values[i], 1e-12);
}

TEST(ApplyHaarFilter, KernelLargerThanImage) {
  EXPECT_EQ(CodeOf([] { ApplyHaarFilter(GrayImage(4, 4, 0.0), HaarKernel::Parse("hline:16x4")); }),
            ErrorCode::kInvalidShape);
}

TEST(CascadeApply, DepthOneIsSingleStage) {
  std::mt19937_64 rng(6);
  const GrayImage img = RandomGray(16, 16, rng);
  const HaarKernel k = HaarKernel::Parse("vedge:4x2");
  EXPECT_EQ(CascadeApply(img, k, 1), ApplyHaarFilter(img, k));
}

TEST(CascadeApply, ConstantImageDepthTwoIsZero) {
  const FeatureMap map = CascadeApply(GrayImage(8, 8, 0.4), HaarKernel::Parse("vedge:4x2"), 2);
  for (double v : map.response.values) EXPECT_EQ(v, 0.0);
}

TEST(CascadeApply, DepthTwoDiffersOnStepEdge) {
  GrayImage img(16, 16, 0.0);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 8; ++x) img(y, x) = 1.0;
  const HaarKernel k = HaarKernel::Parse("vedge:4x2");
  EXPECT_NE(CascadeApply(img, k, 2).response, CascadeApply(img, k, 1).response);
  EXPECT_EQ(CodeOf([&] { CascadeApply(img, k, 3); }), ErrorCode::kConfig);
}

TEST(Psnr, IdenticalIsInfinite) {
  std::mt19937_64 rng(7);
  const GrayImage a = RandomGray(8, 8, rng);
  EXPECT_EQ(Psnr(a, a, 1.0), std::numeric_limits<double>::infinity());
}

TEST(Psnr, UniformUnitDifference) {
  GrayImage a(8, 8, 10.0), b(8, 8, 11.0);
  EXPECT_NEAR(Psnr(a, b, 255.0), 48.1308, 1e-3);
  EXPECT_NEAR(Psnr(a, b, 255.0), 20.0 * std::log10(255.0), 1e-12);
}

TEST(Psnr, MatchesDirectFormulaAndIsSymmetric) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const GrayImage a = RandomGray(9, 7, rng), b = RandomGray(9, 7, rng);
    long double se = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const long double d = static_cast<long double>(a.values[i]) - b.values[i];
      se += d * d;
    }
    const double oracle = static_cast<double>(10.0L * std::log10(1.0L / (se / a.size())));
    EXPECT_NEAR(Psnr(a, b, 1.0), oracle, 1e-9);
    EXPECT_EQ(Psnr(a, b, 1.0), Psnr(b, a, 1.0));
  }
}

TEST(Psnr, DimMismatch) {
  EXPECT_EQ(CodeOf([] { Psnr(GrayImage(2, 2), GrayImage(2, 3), 1.0); }), ErrorCode::kInvalidShape);
}

FeatureMap MapOf(GrayImage img) {
  FeatureMap m;
  m.response = std::move(img);
  m.max = 1.0;
  return m;
}

// Maps at prescribed mutual PSNR: B and C differ by +-delta/2 on one sign
// pattern, A by +-e on an orthogonal one, so MSE(A,B) = MSE(A,C).
std::vector<FeatureMap> PrescribedTriple(double db_far, double db_near) {
  const double mse_near = std::pow(10.0, -db_near / 10.0);
  const double mse_far = std::pow(10.0, -db_far / 10.0);
  const double half = std::sqrt(mse_near) / 2.0;
  const double e = std::sqrt(mse_far - half * half);
  GrayImage a(8, 8), b(8, 8), c(8, 8);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) {
      const double s1 = x % 2 == 0 ? 1.0 : -1.0;
      const double s2 = y % 2 == 0 ? 1.0 : -1.0;
      a(y, x) = 0.5 + e * s2;
      b(y, x) = 0.5 - half * s1;
      c(y, x) = 0.5 + half * s1;
    }
  return {MapOf(a), MapOf(b), MapOf(c)};
}

TEST(SelectFeatures, SingleCandidateKept) {
  const std::vector<FeatureMap> one = {MapOf(GrayImage(4, 4, 0.2))};
  EXPECT_EQ(SelectFeatures(one), (std::vector<std::size_t>{0}));
}

TEST(SelectFeatures, ExactDuplicateDropped) {
  std::mt19937_64 rng(9);
  const FeatureMap m = MapOf(RandomGray(8, 8, rng));
  const std::vector<FeatureMap> pair = {m, m};
  EXPECT_EQ(SelectFeatures(pair), (std::vector<std::size_t>{0}));
}

TEST(SelectFeatures, PrescribedFiveFiveTwentyFive) {
  const std::vector<FeatureMap> maps = PrescribedTriple(5.0, 25.0);
  EXPECT_NEAR(Psnr(maps[0].response, maps[1].response, 1.0), 5.0, 1e-9);
  EXPECT_NEAR(Psnr(maps[0].response, maps[2].response, 1.0), 5.0, 1e-9);
  EXPECT_NEAR(Psnr(maps[1].response, maps[2].response, 1.0), 25.0, 1e-9);
  EXPECT_EQ(SelectFeatures(maps, 18.0), (std::vector<std::size_t>{0, 1}));
}

TEST(SelectFeatures, AllBelowThresholdKeepsEverything) {
  const std::vector<FeatureMap> maps = PrescribedTriple(5.0, 12.0);
  for (double threshold : {12.5, 18.0, 40.0, 1e9}) {
    EXPECT_EQ(SelectFeatures(maps, threshold), (std::vector<std::size_t>{0, 1, 2}));
  }
}

TEST(SelectFeatures, EmptyIsContractError) {
  EXPECT_EQ(CodeOf([] { SelectFeatures({}); }), ErrorCode::kContract);
}

TEST(RefineWithMask, Cases) {
  std::mt19937_64 rng(10);
  const FeatureMap map = ApplyHaarFilter(RandomGray(8, 8, rng), HaarKernel::Parse("diag:4x4"));
  EXPECT_EQ(RefineWithMask(map, ClassMap(8, 8, 3)).response, map.response);
  for (double v : RefineWithMask(map, ClassMap(8, 8, 0)).response.values) EXPECT_EQ(v, 0.0);
  ClassMap half(8, 8, 0);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 4; ++x) half(y, x) = 2;
  const FeatureMap refined = RefineWithMask(map, half);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x)
      EXPECT_EQ(refined.response(y, x), x < 4 ? map.response(y, x) : 0.0);
  EXPECT_EQ(RefineWithMask(refined, half), refined);
  EXPECT_EQ(CodeOf([&] { RefineWithMask(map, ClassMap(4, 8, 0)); }), ErrorCode::kInvalidShape);
}

TEST(ResizeNearest, SamplesTopLeftOfEachCell) {
  GrayImage img(4, 4);
  for (std::size_t i = 0; i < 16; ++i) img.values[i] = static_cast<double>(i);
  const GrayImage half = ResizeNearest(img, 2, 2);
  EXPECT_EQ(half.values, (std::vector<double>{0, 2, 8, 10}));
  EXPECT_EQ(ResizeNearest(img, 4, 4), img);
}

TEST(FeatureBank, FiveDefaultChannels) {
  std::mt19937_64 rng(11);
  const GrayImage img = RandomGray(32, 32, rng);
  const std::vector<HaarKernel> kernels = DefaultKernels();
  const FeatureBank bank = BuildFeatureBank(img, kernels, nullptr, 8, 8);
  EXPECT_EQ(bank.channel_count(), 5u);
  EXPECT_EQ(bank.provenance, kernels);
  const Tensor t = bank.ToTensor();
  EXPECT_EQ(t.shape(), (Shape{1, 8, 8, 5}));
  EXPECT_EQ(t.at(0, 3, 5, 2), bank.channels[2](3, 5));
}

TEST(FeatureBank, SameDimsIsBitEqualToRefinedMaps) {
  std::mt19937_64 rng(12);
  const GrayImage img = RandomGray(16, 16, rng);
  const ClassMap mask = testing::RandomClassMap(16, 16, 3, rng);
  const std::vector<HaarKernel> kernels = DefaultKernels();
  const FeatureBank bank = BuildFeatureBank(img, kernels, &mask, 16, 16);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    EXPECT_EQ(bank.channels[i], RefineWithMask(ExtractFeature(img, kernels[i]), mask).response);
  }
}

TEST(FeatureBank, ConstantImageIsAllZero) {
  ClassMap mask(16, 16, 1);
  const std::vector<HaarKernel> kernels = DefaultKernels();
  for (const ClassMap* m : std::vector<const ClassMap*>{nullptr, &mask}) {
    const FeatureBank bank = BuildFeatureBank(GrayImage(16, 16, 0.3), kernels, m, 4, 4);
    for (const GrayImage& ch : bank.channels)
      for (double v : ch.values) EXPECT_EQ(v, 0.0);
  }
}

}  // namespace
}  // namespace sharpnet
