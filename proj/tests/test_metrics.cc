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
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sharpnet/metrics.h"
#include "oracles.h"
#include "test_util.h"

namespace sharpnet {
namespace {

using namespace oracle;
using testing::CodeOf;
using testing::RandomClassMap;

ClassMap MapOf(std::size_t h, std::size_t w, std::vector<int> v) {
  ClassMap m(h, w);
  m.values = std::move(v);
  return m;
}

ConfusionMatrix RandomMatrix(std::size_t k, std::mt19937_64& rng) {
  ConfusionMatrix m(k);
  std::uniform_int_distribution<int> count(0, 50);
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t p = 0; p < k; ++p) m.Add(t, p, count(rng));
  return m;
}

TEST(Confusion, PerfectPredictionIsDiagonal) {
  std::mt19937_64 rng(1);
  const ClassMap truth = RandomClassMap(8, 8, 4, rng);
  const ConfusionMatrix m = Confusion(truth, truth, 4);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t p = 0; p < 4; ++p) {
      if (t != p) {
        EXPECT_EQ(m.at(t, p), 0);
      }
    }
  EXPECT_EQ(m.total(), 64);
}

TEST(Confusion, SinglePixel) {
  const ConfusionMatrix m = Confusion(MapOf(1, 1, {2}), MapOf(1, 1, {1}), 3);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(m.at(t, p), t == 1 && p == 2 ? 1 : 0);
}

TEST(Confusion, MatchesLoopOracle) {
  std::mt19937_64 rng(2);
  const ClassMap pred = RandomClassMap(32, 32, 5, rng), truth = RandomClassMap(32, 32, 5, rng);
  std::vector<std::int64_t> counts(25, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) ++counts[truth.values[i] * 5 + pred.values[i]];
  const ConfusionMatrix m = Confusion(pred, truth, 5);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t p = 0; p < 5; ++p) EXPECT_EQ(m.at(t, p), counts[t * 5 + p]);
}

TEST(Confusion, Errors) {
  EXPECT_EQ(CodeOf([] { Confusion(MapOf(1, 2, {0, 3}), MapOf(1, 2, {0, 0}), 3); }),
            ErrorCode::kData);
  EXPECT_EQ(CodeOf([] { Confusion(MapOf(1, 2, {0, 0}), MapOf(2, 1, {0, 0}), 3); }),
            ErrorCode::kData);
}

TEST(Iou, HandTwoByTwo) {
  const ConfusionMatrix m = Confusion(MapOf(2, 2, {0, 1, 1, 1}), MapOf(2, 2, {0, 0, 1, 1}), 2);
  const IouResult r = Iou(m, true);
  EXPECT_DOUBLE_EQ(r.per_class[0], 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.mean, 7.0 / 12.0);
  EXPECT_DOUBLE_EQ(Iou(m, false).mean, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(Fwiou(m), 7.0 / 12.0);
}

TEST(Iou, PerfectAndDisjoint) {
  std::mt19937_64 rng(3);
  const ClassMap truth = RandomClassMap(6, 6, 3, rng);
  for (double v : Iou(Confusion(truth, truth, 3), true).per_class) EXPECT_EQ(v, 1.0);
  const IouResult r = Iou(Confusion(ClassMap(2, 2, 1), ClassMap(2, 2, 0), 2), true);
  EXPECT_EQ(r.per_class[0], 0.0);
  EXPECT_EQ(r.per_class[1], 0.0);
}

TEST(Iou, AbsentClassesAreExcluded) {
  const ConfusionMatrix m = Confusion(MapOf(1, 2, {0, 1}), MapOf(1, 2, {0, 1}), 4);
  const IouResult r = Iou(m, true);
  EXPECT_TRUE(std::isnan(r.per_class[2]));
  EXPECT_TRUE(std::isnan(r.per_class[3]));
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_TRUE(std::isnan(Iou(Confusion(ClassMap(1, 1, 0), ClassMap(1, 1, 0), 3), false).mean));
}

TEST(Fwiou, WeightModes) {
  std::mt19937_64 rng(4);
  const ClassMap truth = RandomClassMap(10, 10, 4, rng);
  const std::vector<double> ciw = {0.0, 0.031, 1.0, 0.6419};
  EXPECT_DOUBLE_EQ(Fwiou(Confusion(truth, truth, 4), ciw), 1.0);
  EXPECT_DOUBLE_EQ(Fwiou(Confusion(truth, truth, 4)), 1.0);

  const ConfusionMatrix m = Confusion(RandomClassMap(10, 10, 4, rng), truth, 4);
  const IouResult iou = Iou(m, true);
  const std::vector<double> uniform(4, 0.25);
  long double mean = 0.0L;
  int present = 0;
  for (std::size_t c = 0; c < 4; ++c)
    if (m.present_in_truth(c)) {
      mean += iou.per_class[c];
      ++present;
    }
  EXPECT_NEAR(Fwiou(m, uniform), static_cast<double>(mean / present), 1e-12);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<double> one_hot(4, 0.0);
    one_hot[c] = 1.0;
    EXPECT_NEAR(Fwiou(m, one_hot), iou.per_class[c], 1e-15);
  }
  EXPECT_EQ(CodeOf([&] { Fwiou(m, std::vector<double>(3, 1.0)); }), ErrorCode::kContract);
}

TEST(Fwiou, CiwRenormalizesOverPresentClasses) {
  // Class 2 is absent from the truth, so its weight drops out.
  const ConfusionMatrix m = Confusion(MapOf(1, 4, {0, 1, 1, 2}), MapOf(1, 4, {0, 0, 1, 1}), 3);
  const std::vector<double> w = {0.2, 0.6, 0.9};
  const LMatrix lm = ToLong(m);
  const long double expected = (0.2L * OracleIou(lm, 0) + 0.6L * OracleIou(lm, 1)) / 0.8L;
  EXPECT_NEAR(Fwiou(m, w), static_cast<double>(expected), 1e-15);
}

TEST(Summary, PerfectPrediction) {
  std::mt19937_64 rng(5);
  const ClassMap truth = RandomClassMap(8, 8, 3, rng);
  const ConfusionMatrix m = Confusion(truth, truth, 3);
  EXPECT_EQ(F1Macro(m), 1.0);
  EXPECT_EQ(BalancedAccuracy(m), 1.0);
  EXPECT_DOUBLE_EQ(Mcc(m), 1.0);
}

TEST(Summary, ConstantPredictionIsChance) {
  const ConfusionMatrix m = Confusion(ClassMap(2, 2, 0), MapOf(2, 2, {0, 0, 1, 1}), 2);
  EXPECT_EQ(BalancedAccuracy(m), 0.5);
  EXPECT_EQ(Mcc(m), 0.0);
}

TEST(Summary, MatchesExtendedPrecisionOracles) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const ConfusionMatrix m = RandomMatrix(3, rng);
    const LMatrix lm = ToLong(m);
    EXPECT_NEAR(F1Macro(m), static_cast<double>(OracleF1(lm)), 1e-12);
    EXPECT_NEAR(BalancedAccuracy(m), static_cast<double>(OracleBalancedAccuracy(lm)), 1e-12);
    EXPECT_NEAR(Mcc(m), static_cast<double>(OracleMcc(lm)), 1e-12);
  }
}

TEST(Summary, RangesAndLabelPermutationInvariance) {
  std::mt19937_64 rng(7);
  const std::vector<int> perm = {2, 0, 3, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const ClassMap pred = RandomClassMap(12, 12, 4, rng), truth = RandomClassMap(12, 12, 4, rng);
    ClassMap pp = pred, tp = truth;
    for (int& v : pp.values) v = perm[v];
    for (int& v : tp.values) v = perm[v];
    const ConfusionMatrix a = Confusion(pred, truth, 4), b = Confusion(pp, tp, 4);
    EXPECT_GE(F1Macro(a), 0.0);
    EXPECT_LE(F1Macro(a), 1.0);
    EXPECT_GE(Mcc(a), -1.0);
    EXPECT_LE(Mcc(a), 1.0);
    EXPECT_NEAR(Iou(a, true).mean, Iou(b, true).mean, 1e-12);
    EXPECT_NEAR(F1Macro(a), F1Macro(b), 1e-12);
    EXPECT_NEAR(BalancedAccuracy(a), BalancedAccuracy(b), 1e-12);
    EXPECT_NEAR(Mcc(a), Mcc(b), 1e-12);
  }
}

TEST(Report, KeysAndNullForUndefined) {
  const ConfusionMatrix m = Confusion(MapOf(1, 2, {0, 1}), MapOf(1, 2, {0, 1}), 3);
  const std::vector<double> ciw = {0.0, 1.0, 0.5};
  const nlohmann::json r = MetricsReport(m, ciw);
  for (const char* key : {"iou_bg", "iou_nobg", "fwiou", "ciw_fwiou", "f1", "bal_acc", "mcc", "per_class"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
  EXPECT_EQ(r["iou_bg"].get<double>(), 1.0);
  const nlohmann::json& per_class = r["per_class"];
  ASSERT_TRUE(per_class.is_object());
  EXPECT_EQ(per_class["0"].get<double>(), 1.0);
  EXPECT_TRUE(per_class["2"].is_null());
  EXPECT_TRUE(MetricsReport(m, {})["ciw_fwiou"].is_null());
}

}  // namespace
}  // namespace sharpnet
