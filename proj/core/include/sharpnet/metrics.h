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

#ifndef SHARPNET_METRICS_H_
#define SHARPNET_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "sharpnet/image.h"

namespace sharpnet {

// counts[t][p]: pixels of true class t predicted as p. Class 0 is background.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  std::size_t num_classes() const { return k_; }
  std::int64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
  void Add(std::size_t truth, std::size_t pred, std::int64_t count = 1);
  void Merge(const ConfusionMatrix& other);

  std::int64_t total() const;
  std::int64_t row_sum(std::size_t truth) const;
  std::int64_t col_sum(std::size_t pred) const;
  bool present_in_truth(std::size_t c) const { return row_sum(c) > 0; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::int64_t> counts_;
};

// Throws kData on mismatched dims or out-of-range labels.
ConfusionMatrix Confusion(const ClassMap& pred, const ClassMap& truth, std::size_t num_classes);

// Undefined results (empty averaging set, zero weight mass) are NaN.
struct IouResult {
  std::vector<double> per_class;  // NaN for classes absent from pred and truth
  double mean = 0.0;
};

IouResult Iou(const ConfusionMatrix& m, bool include_background);

// Without weights: sum_c freq_c IoU_c with freq_c the share of true pixels.
// With weights: weights renormalized over classes present in the truth.
double Fwiou(const ConfusionMatrix& m);
double Fwiou(const ConfusionMatrix& m, std::span<const double> weights);

// Macro F1 over classes present in the truth.
double F1Macro(const ConfusionMatrix& m);
// Mean recall over classes present in the truth.
double BalancedAccuracy(const ConfusionMatrix& m);
// Multiclass R_K statistic; 0 when the denominator vanishes.
double Mcc(const ConfusionMatrix& m);

// The flat report emitted by `sharpnet evaluate`. NaN values become null.
nlohmann::json MetricsReport(const ConfusionMatrix& m, std::span<const double> ciw);

}  // namespace sharpnet

#endif  // SHARPNET_METRICS_H_
