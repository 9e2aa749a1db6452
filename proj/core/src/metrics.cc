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

#include "sharpnet/metrics.h"

#include <cmath>
#include <limits>
#include <string>

#include "sharpnet/error.h"

namespace sharpnet {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json JsonNumber(double v) {
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : k_(num_classes), counts_(num_classes * num_classes, 0) {
  Require(num_classes >= 1, ErrorCode::kContract, "confusion matrix needs >= 1 class");
}

void ConfusionMatrix::Add(std::size_t truth, std::size_t pred, std::int64_t count) {
  Require(truth < k_ && pred < k_, ErrorCode::kData, "class index out of range");
  Require(count >= 0, ErrorCode::kContract, "negative confusion count");
  counts_[truth * k_ + pred] += count;
}

void ConfusionMatrix::Merge(const ConfusionMatrix& other) {
  Require(other.k_ == k_, ErrorCode::kContract, "cannot merge matrices of different K");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::int64_t c : counts_) s += c;
  return s;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::int64_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += at(truth, p);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::int64_t s = 0;
  for (std::size_t t = 0; t < k_; ++t) s += at(t, pred);
  return s;
}

ConfusionMatrix Confusion(const ClassMap& pred, const ClassMap& truth, std::size_t num_classes) {
  Require(pred.height == truth.height && pred.width == truth.width, ErrorCode::kData,
          "prediction and truth dims differ");
  ConfusionMatrix m(num_classes);
  const int k = static_cast<int>(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth.values[i], p = pred.values[i];
    Require(t >= 0 && t < k && p >= 0 && p < k, ErrorCode::kData,
            "class label out of range [0, " + std::to_string(k) + ") at pixel " +
                std::to_string(i));
    m.Add(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return m;
}

IouResult Iou(const ConfusionMatrix& m, bool include_background) {
  const std::size_t k = m.num_classes();
  IouResult r;
  r.per_class.assign(k, kNaN);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::int64_t tp = m.at(c, c);
    const std::int64_t uni = m.row_sum(c) + m.col_sum(c) - tp;
    if (uni == 0) continue;
    r.per_class[c] = static_cast<double>(tp) / static_cast<double>(uni);
    if (c == 0 && !include_background) continue;
    sum += r.per_class[c];
    ++count;
  }
  r.mean = count > 0 ? sum / static_cast<double>(count) : kNaN;
  return r;
}

double Fwiou(const ConfusionMatrix& m) {
  const std::int64_t total = m.total();
  if (total == 0) return kNaN;
  const IouResult iou = Iou(m, true);
  double s = 0.0;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    const std::int64_t rows = m.row_sum(c);
    if (rows == 0) continue;
    s += static_cast<double>(rows) / static_cast<double>(total) * iou.per_class[c];
  }
  return s;
}

double Fwiou(const ConfusionMatrix& m, std::span<const double> weights) {
  Require(weights.size() == m.num_classes(), ErrorCode::kContract,
          "weight vector length " + std::to_string(weights.size()) + " != K " +
              std::to_string(m.num_classes()));
  const IouResult iou = Iou(m, true);
  double mass = 0.0;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    if (m.present_in_truth(c)) mass += weights[c];
  }
  if (!(mass > 0.0)) return kNaN;
  double s = 0.0;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    if (m.present_in_truth(c)) s += weights[c] / mass * iou.per_class[c];
  }
  return s;
}

double F1Macro(const ConfusionMatrix& m) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    if (!m.present_in_truth(c)) continue;
    const std::int64_t tp = m.at(c, c);
    const std::int64_t fp = m.col_sum(c) - tp;
    const std::int64_t fn = m.row_sum(c) - tp;
    sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    ++count;
  }
  return count > 0 ? sum / static_cast<double>(count) : kNaN;
}

double BalancedAccuracy(const ConfusionMatrix& m) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    const std::int64_t rows = m.row_sum(c);
    if (rows == 0) continue;
    sum += static_cast<double>(m.at(c, c)) / static_cast<double>(rows);
    ++count;
  }
  return count > 0 ? sum / static_cast<double>(count) : kNaN;
}

double Mcc(const ConfusionMatrix& m) {
  const std::size_t k = m.num_classes();
  double correct = 0.0, s = 0.0, pt = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double p = static_cast<double>(m.col_sum(c));
    const double t = static_cast<double>(m.row_sum(c));
    correct += static_cast<double>(m.at(c, c));
    s += t;
    pt += p * t;
    pp += p * p;
    tt += t * t;
  }
  const double denom = std::sqrt((s * s - pp) * (s * s - tt));
  if (!(denom > 0.0)) return 0.0;
  return (correct * s - pt) / denom;
}

nlohmann::json MetricsReport(const ConfusionMatrix& m, std::span<const double> ciw) {
  const IouResult with_bg = Iou(m, true);
  const IouResult without_bg = Iou(m, false);
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    per_class[std::to_string(c)] = JsonNumber(with_bg.per_class[c]);
  }
  return {
      {"iou_bg", JsonNumber(with_bg.mean)},
      {"iou_nobg", JsonNumber(without_bg.mean)},
      {"fwiou", JsonNumber(Fwiou(m))},
      {"ciw_fwiou", ciw.empty() ? nlohmann::json(nullptr) : JsonNumber(Fwiou(m, ciw))},
      {"f1", JsonNumber(F1Macro(m))},
      {"bal_acc", JsonNumber(BalancedAccuracy(m))},
      {"mcc", JsonNumber(Mcc(m))},
      {"per_class", per_class},
  };
}

}  // namespace sharpnet
