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

#ifndef SHARPNET_TESTS_TEST_UTIL_H_
#define SHARPNET_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "sharpnet/autodiff.h"
#include "sharpnet/error.h"
#include "sharpnet/image.h"
#include "sharpnet/tensor.h"

namespace sharpnet::testing {

inline Tensor RandomTensor(Shape shape, std::mt19937_64& rng, double lo = -1.0,
                           double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

// Random integers in [lo, hi] stored as doubles; sums of these are exact.
inline Tensor RandomIntegerTensor(Shape shape, std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

inline GrayImage RandomGray(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  GrayImage img(h, w);
  for (double& v : img.values) v = dist(rng);
  return img;
}

inline ClassMap RandomClassMap(std::size_t h, std::size_t w, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, k - 1);
  ClassMap m(h, w);
  for (int& v : m.values) v = dist(rng);
  return m;
}

// Runs `fn` and returns the ErrorCode it throws; fails the test otherwise.
template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected sharpnet::Error";
  return ErrorCode::kContract;
}

}  // namespace sharpnet::testing

#endif  // SHARPNET_TESTS_TEST_UTIL_H_
