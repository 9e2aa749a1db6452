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

#ifndef SHARPNET_TNSR_H_
#define SHARPNET_TNSR_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "sharpnet/tensor.h"

namespace sharpnet {

// TNSR1 tensor record:
//   "TNSR" | u8 version (1) | u8 dtype (0 = f32, 1 = f64) | u8 rank |
//   rank x u32 LE dims | row-major LE payload
enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

inline constexpr char kTnsrMagic[4] = {'T', 'N', 'S', 'R'};
inline constexpr std::uint8_t kTnsrVersion = 1;

void WriteTensor(std::ostream& out, const Tensor& tensor,
                 DType dtype = DType::kF64);
Tensor ReadTensor(std::istream& in);

void SaveTensor(const std::filesystem::path& path, const Tensor& tensor,
                DType dtype = DType::kF64);
Tensor LoadTensor(const std::filesystem::path& path);

// Little-endian primitives shared with the checkpoint container.
void WriteU32(std::ostream& out, std::uint32_t value);
std::uint32_t ReadU32(std::istream& in);
void WriteF64(std::ostream& out, double value);
double ReadF64(std::istream& in);

}  // namespace sharpnet

#endif  // SHARPNET_TNSR_H_
