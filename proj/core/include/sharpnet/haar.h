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

#ifndef SHARPNET_HAAR_H_
#define SHARPNET_HAAR_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sharpnet/image.h"
#include "sharpnet/tensor.h"

namespace sharpnet {

// (H+1) x (W+1) prefix sums; row 0 and column 0 are zero.
class IntegralImage {
 public:
  explicit IntegralImage(const GrayImage& image);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  // S[y][x]: sum of pixels strictly above and left of (x, y).
  double at(std::size_t y, std::size_t x) const { return sums_[y * (width_ + 1) + x]; }

  // Sum over the w x h rectangle whose top-left pixel is (x, y).
  double RectSum(std::size_t x, std::size_t y, std::size_t w, std::size_t h) const;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> sums_;
};

enum class HaarFamily {
  kVerticalEdge,    // left half minus right half
  kHorizontalEdge,  // top half minus bottom half
  kVerticalLine,    // outer columns (w/4 each) minus middle (w/2)
  kHorizontalLine,  // outer rows (h/4 each) minus middle (h/2)
  kDiagonal,        // TL + BR - TR - BL quadrants
};

std::string_view HaarFamilyName(HaarFamily family);

struct HaarKernel {
  HaarFamily family = HaarFamily::kVerticalEdge;
  std::size_t width = 4;
  std::size_t height = 2;
  int cascade_depth = 1;

  // Throws kConfig unless the window is a power of two per axis and
  // splits evenly for the family.
  void Validate() const;

  // `<family>:<w>x<h>[:x2]`, family in {vedge, hedge, vline, hline, diag}.
  static HaarKernel Parse(std::string_view spec);
  std::string ToString() const;

  friend bool operator==(const HaarKernel&, const HaarKernel&) = default;
};

// vedge:4x2, hedge:4x4, vline:8x4, hline:16x4, diag:4x4.
std::vector<HaarKernel> DefaultKernels();

// Raw response of the window whose top-left pixel is (x, y).
double HaarResponse(const IntegralImage& ii, const HaarKernel& kernel,
                    std::size_t x, std::size_t y);

// Normalized filter output plus the min/max that produced it.
struct FeatureMap {
  GrayImage response;  // values in [0, 1]
  double min = 0.0;
  double max = 0.0;

  GrayImage Denormalize() const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

// Min-max scaling to [0, 1]; a constant map becomes all zeros.
FeatureMap NormalizeResponse(GrayImage raw);

// Stride-1 response at every pixel. The window for pixel (x, y) has its
// top-left at (x - w/2, y - h/2); the response is zero-padded where that
// window leaves the image.
GrayImage DenseResponse(const GrayImage& image, const HaarKernel& kernel);

// Dense response followed by normalization (single stage, ignores
// kernel.cascade_depth).
FeatureMap ApplyHaarFilter(const GrayImage& image, const HaarKernel& kernel);

// depth 1 == ApplyHaarFilter; depth 2 re-filters the normalized response
// with the same kernel.
FeatureMap CascadeApply(const GrayImage& image, const HaarKernel& kernel, int depth);

// CascadeApply at kernel.cascade_depth.
FeatureMap ExtractFeature(const GrayImage& image, const HaarKernel& kernel);

// 10 log10(max^2 / MSE) in dB; +infinity when the images are identical.
double Psnr(const GrayImage& a, const GrayImage& b, double max_val);

// Greedy scan in input order: a candidate is kept iff its PSNR (max_val 1)
// against every already-kept map is below `threshold_db`.
std::vector<std::size_t> SelectFeatures(std::span<const FeatureMap> candidates,
                                        double threshold_db = 18.0);

// Zeroes responses on background (class 0) pixels.
FeatureMap RefineWithMask(const FeatureMap& feature, const ClassMap& mask);

GrayImage ResizeNearest(const GrayImage& image, std::size_t height, std::size_t width);

struct FeatureBank {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<GrayImage> channels;
  std::vector<HaarKernel> provenance;

  std::size_t channel_count() const { return channels.size(); }
  // 1 x H x W x C tensor, channels in provenance order.
  Tensor ToTensor() const;
};

// `mask` may be null. Maps are refined at source resolution, then resized.
FeatureBank BuildFeatureBank(const GrayImage& image, std::span<const HaarKernel> kernels,
                             const ClassMap* mask, std::size_t target_height,
                             std::size_t target_width);

}  // namespace sharpnet

#endif  // SHARPNET_HAAR_H_
