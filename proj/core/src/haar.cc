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

#include "sharpnet/haar.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "sharpnet/error.h"

namespace sharpnet {
namespace {

constexpr double kResponseNoiseUlps = 16.0;

bool IsPowerOfTwo(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void RequireSameDims(const GrayImage& a, const GrayImage& b, const char* what) {
  Require(a.height == b.height && a.width == b.width, ErrorCode::kInvalidShape,
          std::string(what) + ": dimension mismatch " + std::to_string(a.height) +
              "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) +
              "x" + std::to_string(b.width));
}

std::size_t ParseSize(std::string_view text, std::string_view spec) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  Require(ec == std::errc() && ptr == text.data() + text.size(), ErrorCode::kConfig,
          "bad window size in kernel spec '" + std::string(spec) + "'");
  return value;
}

}  // namespace

// ---- integral image ---------------------------------------------------------

IntegralImage::IntegralImage(const GrayImage& image)
    : height_(image.height), width_(image.width) {
  Require(height_ > 0 && width_ > 0, ErrorCode::kInvalidShape,
          "integral image of an empty image");
  sums_.assign((height_ + 1) * (width_ + 1), 0.0);
  const std::size_t stride = width_ + 1;
  for (std::size_t y = 0; y < height_; ++y) {
    double row = 0.0;
    for (std::size_t x = 0; x < width_; ++x) {
      row += image(y, x);
      sums_[(y + 1) * stride + x + 1] = sums_[y * stride + x + 1] + row;
    }
  }
}

double IntegralImage::RectSum(std::size_t x, std::size_t y, std::size_t w,
                              std::size_t h) const {
  Require(w > 0 && h > 0, ErrorCode::kInvalidShape, "rectangle has zero area");
  Require(x + w <= width_ && y + h <= height_, ErrorCode::kInvalidShape,
          "rectangle exceeds image bounds");
  return at(y + h, x + w) - at(y, x + w) - at(y + h, x) + at(y, x);
}

// ---- kernels ----------------------------------------------------------------

std::string_view HaarFamilyName(HaarFamily family) {
  switch (family) {
    case HaarFamily::kVerticalEdge: return "vedge";
    case HaarFamily::kHorizontalEdge: return "hedge";
    case HaarFamily::kVerticalLine: return "vline";
    case HaarFamily::kHorizontalLine: return "hline";
    case HaarFamily::kDiagonal: return "diag";
  }
  return "?";
}

void HaarKernel::Validate() const {
  const std::string name = ToString();
  Require(IsPowerOfTwo(width) && IsPowerOfTwo(height), ErrorCode::kConfig,
          "kernel " + name + ": window sides must be powers of two");
  Require(cascade_depth == 1 || cascade_depth == 2, ErrorCode::kConfig,
          "kernel " + name + ": cascade depth must be 1 or 2");
  switch (family) {
    case HaarFamily::kVerticalEdge:
      Require(width % 2 == 0, ErrorCode::kConfig, "kernel " + name + ": width must be even");
      break;
    case HaarFamily::kHorizontalEdge:
      Require(height % 2 == 0, ErrorCode::kConfig, "kernel " + name + ": height must be even");
      break;
    case HaarFamily::kVerticalLine:
      Require(width % 4 == 0, ErrorCode::kConfig,
              "kernel " + name + ": width must be divisible by 4");
      break;
    case HaarFamily::kHorizontalLine:
      Require(height % 4 == 0, ErrorCode::kConfig,
              "kernel " + name + ": height must be divisible by 4");
      break;
    case HaarFamily::kDiagonal:
      Require(width % 2 == 0 && height % 2 == 0, ErrorCode::kConfig,
              "kernel " + name + ": window sides must be even");
      break;
  }
}

HaarKernel HaarKernel::Parse(std::string_view spec) {
  const auto colon = spec.find(':');
  Require(colon != std::string_view::npos, ErrorCode::kConfig,
          "kernel spec '" + std::string(spec) + "' must look like <family>:<w>x<h>[:x2]");
  const std::string_view family_name = spec.substr(0, colon);
  std::string_view rest = spec.substr(colon + 1);

  HaarKernel kernel;
  bool known = false;
  for (HaarFamily f : {HaarFamily::kVerticalEdge, HaarFamily::kHorizontalEdge,
                       HaarFamily::kVerticalLine, HaarFamily::kHorizontalLine,
                       HaarFamily::kDiagonal}) {
    if (HaarFamilyName(f) == family_name) {
      kernel.family = f;
      known = true;
    }
  }
  Require(known, ErrorCode::kConfig,
          "unknown Haar family '" + std::string(family_name) + "'");

  const auto second = rest.find(':');
  if (second != std::string_view::npos) {
    Require(rest.substr(second + 1) == "x2", ErrorCode::kConfig,
            "kernel spec '" + std::string(spec) + "': only ':x2' suffix is allowed");
    kernel.cascade_depth = 2;
    rest = rest.substr(0, second);
  }
  const auto x = rest.find('x');
  Require(x != std::string_view::npos, ErrorCode::kConfig,
          "kernel spec '" + std::string(spec) + "' is missing <w>x<h>");
  kernel.width = ParseSize(rest.substr(0, x), spec);
  kernel.height = ParseSize(rest.substr(x + 1), spec);
  kernel.Validate();
  return kernel;
}

std::string HaarKernel::ToString() const {
  std::string out = std::string(HaarFamilyName(family)) + ":" + std::to_string(width) +
                    "x" + std::to_string(height);
  if (cascade_depth == 2) out += ":x2";
  return out;
}

std::vector<HaarKernel> DefaultKernels() {
  return {
      {HaarFamily::kVerticalEdge, 4, 2, 1},
      {HaarFamily::kHorizontalEdge, 4, 4, 1},
      {HaarFamily::kVerticalLine, 8, 4, 1},
      {HaarFamily::kHorizontalLine, 16, 4, 1},
      {HaarFamily::kDiagonal, 4, 4, 1},
  };
}

double HaarResponse(const IntegralImage& ii, const HaarKernel& kernel,
                    std::size_t x, std::size_t y) {
  const std::size_t w = kernel.width, h = kernel.height;
  Require(x + w <= ii.width() && y + h <= ii.height(), ErrorCode::kInvalidShape,
          "Haar window " + kernel.ToString() + " overflows the image at (" +
              std::to_string(x) + "," + std::to_string(y) + ")");
  switch (kernel.family) {
    case HaarFamily::kVerticalEdge:
      return ii.RectSum(x, y, w / 2, h) - ii.RectSum(x + w / 2, y, w / 2, h);
    case HaarFamily::kHorizontalEdge:
      return ii.RectSum(x, y, w, h / 2) - ii.RectSum(x, y + h / 2, w, h / 2);
    case HaarFamily::kVerticalLine:
      return ii.RectSum(x, y, w / 4, h) + ii.RectSum(x + 3 * w / 4, y, w / 4, h) -
             ii.RectSum(x + w / 4, y, w / 2, h);
    case HaarFamily::kHorizontalLine:
      return ii.RectSum(x, y, w, h / 4) + ii.RectSum(x, y + 3 * h / 4, w, h / 4) -
             ii.RectSum(x, y + h / 4, w, h / 2);
    case HaarFamily::kDiagonal:
      return ii.RectSum(x, y, w / 2, h / 2) + ii.RectSum(x + w / 2, y + h / 2, w / 2, h / 2) -
             ii.RectSum(x + w / 2, y, w / 2, h / 2) - ii.RectSum(x, y + h / 2, w / 2, h / 2);
  }
  return 0.0;
}

// ---- filtering --------------------------------------------------------------

GrayImage FeatureMap::Denormalize() const {
  GrayImage out = response;
  for (double& v : out.values) v = v * (max - min) + min;
  return out;
}

FeatureMap NormalizeResponse(GrayImage raw) {
  FeatureMap map;
  if (raw.size() == 0) {
    map.response = std::move(raw);
    return map;
  }
  const auto [lo, hi] = std::minmax_element(raw.values.begin(), raw.values.end());
  map.min = *lo;
  map.max = *hi;
  const double range = map.max - map.min;
  for (double& v : raw.values) v = range > 0.0 ? (v - map.min) / range : 0.0;
  map.response = std::move(raw);
  return map;
}

GrayImage DenseResponse(const GrayImage& image, const HaarKernel& kernel) {
  kernel.Validate();
  Require(image.height > 0 && image.width > 0, ErrorCode::kInvalidShape,
          "Haar filter on an empty image");
  Require(kernel.width <= image.width && kernel.height <= image.height,
          ErrorCode::kInvalidShape,
          "kernel " + kernel.ToString() + " is larger than the " +
              std::to_string(image.height) + "x" + std::to_string(image.width) + " image");
  // Window top-left sits at (x - w/2, y - h/2); positions where the window
  // leaves the image are zero.
  const std::size_t off_x = kernel.width / 2, off_y = kernel.height / 2;
  const IntegralImage ii(image);
  // Responses below the rounding noise of the cumulative sums are zero, so
  // balanced windows on flat regions cancel exactly.
  double magnitude = 0.0;
  for (std::size_t y = 0; y <= image.height; ++y)
    for (std::size_t x = 0; x <= image.width; ++x) magnitude = std::max(magnitude, std::abs(ii.at(y, x)));
  const double floor = kResponseNoiseUlps * std::numeric_limits<double>::epsilon() * magnitude;
  GrayImage out(image.height, image.width, 0.0);
  for (std::size_t y = off_y; y + kernel.height - off_y <= image.height; ++y) {
    for (std::size_t x = off_x; x + kernel.width - off_x <= image.width; ++x) {
      const double r = HaarResponse(ii, kernel, x - off_x, y - off_y);
      out(y, x) = std::abs(r) <= floor ? 0.0 : r;
    }
  }
  return out;
}

FeatureMap ApplyHaarFilter(const GrayImage& image, const HaarKernel& kernel) {
  return NormalizeResponse(DenseResponse(image, kernel));
}

FeatureMap CascadeApply(const GrayImage& image, const HaarKernel& kernel, int depth) {
  Require(depth == 1 || depth == 2, ErrorCode::kConfig, "cascade depth must be 1 or 2");
  FeatureMap map = ApplyHaarFilter(image, kernel);
  if (depth == 2) map = ApplyHaarFilter(map.response, kernel);
  return map;
}

FeatureMap ExtractFeature(const GrayImage& image, const HaarKernel& kernel) {
  return CascadeApply(image, kernel, kernel.cascade_depth);
}

// ---- selection --------------------------------------------------------------

double Psnr(const GrayImage& a, const GrayImage& b, double max_val) {
  RequireSameDims(a, b, "psnr");
  Require(max_val > 0.0, ErrorCode::kContract, "psnr max_val must be positive");
  Require(a.size() > 0, ErrorCode::kInvalidShape, "psnr of empty images");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(max_val * max_val / mse);
}

std::vector<std::size_t> SelectFeatures(std::span<const FeatureMap> candidates,
                                        double threshold_db) {
  Require(!candidates.empty(), ErrorCode::kContract, "no feature candidates");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool distinct = true;
    for (std::size_t j : kept) {
      if (Psnr(candidates[i].response, candidates[j].response, 1.0) >= threshold_db) {
        distinct = false;
        break;
      }
    }
    if (distinct) kept.push_back(i);
  }
  return kept;
}

FeatureMap RefineWithMask(const FeatureMap& feature, const ClassMap& mask) {
  Require(mask.height == feature.response.height && mask.width == feature.response.width,
          ErrorCode::kInvalidShape, "mask dims do not match the feature map");
  FeatureMap out = feature;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.values[i] == 0) out.response.values[i] = 0.0;
  }
  return out;
}

GrayImage ResizeNearest(const GrayImage& image, std::size_t height, std::size_t width) {
  Require(height > 0 && width > 0 && image.size() > 0, ErrorCode::kInvalidShape,
          "resize to/from empty dims");
  if (height == image.height && width == image.width) return image;
  GrayImage out(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = y * image.height / height;
    for (std::size_t x = 0; x < width; ++x) out(y, x) = image(sy, x * image.width / width);
  }
  return out;
}

Tensor FeatureBank::ToTensor() const {
  Require(!channels.empty(), ErrorCode::kInvalidShape, "empty feature bank");
  const std::size_t c_count = channels.size();
  Tensor t({1, height, width, c_count});
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t i = 0; i < height * width; ++i) t[i * c_count + c] = channels[c].values[i];
  }
  return t;
}

FeatureBank BuildFeatureBank(const GrayImage& image, std::span<const HaarKernel> kernels,
                             const ClassMap* mask, std::size_t target_height,
                             std::size_t target_width) {
  Require(!kernels.empty(), ErrorCode::kContract, "feature bank needs at least one kernel");
  FeatureBank bank;
  bank.height = target_height;
  bank.width = target_width;
  for (const HaarKernel& kernel : kernels) {
    FeatureMap map = ExtractFeature(image, kernel);
    if (mask != nullptr) map = RefineWithMask(map, *mask);
    bank.channels.push_back(ResizeNearest(map.response, target_height, target_width));
    bank.provenance.push_back(kernel);
  }
  return bank;
}

}  // namespace sharpnet
