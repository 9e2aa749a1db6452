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

#ifndef SHARPNET_SRC_GEMM_H_
#define SHARPNET_SRC_GEMM_H_

#include <cstddef>
#include <cstring>
#include <vector>

namespace sharpnet::internal {

#if defined(__AVX__)
inline constexpr std::size_t kLanes = 4;
#else
inline constexpr std::size_t kLanes = 2;
#endif
using V4 = double __attribute__((vector_size(kLanes * sizeof(double))));

inline V4 Load(const double* p) {
  V4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void Store(double* p, V4 v) { std::memcpy(p, &v, sizeof v); }

// C (m x n) = [C +] A (m x k) * B (k x n), all row-major and dense.
// Every output element is summed over l in ascending order starting from
// zero, then added to C when accumulating, so results match a naive triple
// loop bit-for-bit.
inline void Gemm(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate) {
  constexpr std::size_t kRows = 4;
  constexpr std::size_t kCols = 2 * kLanes;
  std::size_t i = 0;
  for (; i + kRows <= m; i += kRows) {
    std::size_t j = 0;
    for (; j + kCols <= n; j += kCols) {
      V4 acc[kRows][2] = {};
      for (std::size_t l = 0; l < k; ++l) {
        const double* brow = b + l * n + j;
        const V4 b0 = Load(brow), b1 = Load(brow + kLanes);
        for (std::size_t r = 0; r < kRows; ++r) {
          const double av = a[(i + r) * k + l];
          acc[r][0] += av * b0;
          acc[r][1] += av * b1;
        }
      }
      for (std::size_t r = 0; r < kRows; ++r) {
        double* crow = c + (i + r) * n + j;
        if (accumulate) {
          Store(crow, Load(crow) + acc[r][0]);
          Store(crow + kLanes, Load(crow + kLanes) + acc[r][1]);
        } else {
          Store(crow, acc[r][0]);
          Store(crow + kLanes, acc[r][1]);
        }
      }
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < kRows; ++r) {
        double acc = 0.0;
        for (std::size_t l = 0; l < k; ++l) acc += a[(i + r) * k + l] * b[l * n + j];
        double& out = c[(i + r) * n + j];
        out = accumulate ? out + acc : acc;
      }
    }
  }
  for (; i < m; ++i) {
    std::vector<double> acc(n, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
      const double av = a[i * k + l];
      const double* brow = b + l * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
    }
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = accumulate ? crow[j] + acc[j] : acc[j];
  }
}

// Row-major transpose of an m x n matrix.
inline std::vector<double> Transpose(const double* a, std::size_t m, std::size_t n) {
  std::vector<double> t(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = a[i * n + j];
  return t;
}

}  // namespace sharpnet::internal

#endif  // SHARPNET_SRC_GEMM_H_
