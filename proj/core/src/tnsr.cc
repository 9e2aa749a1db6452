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

#include "sharpnet/tnsr.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "sharpnet/error.h"

namespace sharpnet {
namespace {

template <typename UInt>
void WriteLe(std::ostream& out, UInt value) {
  std::array<char, sizeof(UInt)> bytes;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt ReadLe(std::istream& in) {
  std::array<unsigned char, sizeof(UInt)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  Require(in.gcount() == static_cast<std::streamsize>(bytes.size()),
          ErrorCode::kFormat, "truncated TNSR stream");
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return value;
}

std::uint8_t ReadByte(std::istream& in) {
  const int c = in.get();
  Require(c != std::char_traits<char>::eof(), ErrorCode::kFormat,
          "truncated TNSR stream");
  return static_cast<std::uint8_t>(c);
}

}  // namespace

void WriteU32(std::ostream& out, std::uint32_t value) { WriteLe(out, value); }
std::uint32_t ReadU32(std::istream& in) { return ReadLe<std::uint32_t>(in); }
void WriteF64(std::ostream& out, double value) {
  WriteLe(out, std::bit_cast<std::uint64_t>(value));
}
double ReadF64(std::istream& in) {
  return std::bit_cast<double>(ReadLe<std::uint64_t>(in));
}

void WriteTensor(std::ostream& out, const Tensor& tensor, DType dtype) {
  Require(tensor.rank() <= std::numeric_limits<std::uint8_t>::max(),
          ErrorCode::kFormat, "tensor rank too large for TNSR1");
  out.write(kTnsrMagic, sizeof(kTnsrMagic));
  out.put(static_cast<char>(kTnsrVersion));
  out.put(static_cast<char>(dtype));
  out.put(static_cast<char>(tensor.rank()));
  for (std::size_t d : tensor.shape()) {
    Require(d <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::kFormat,
            "dimension too large for TNSR1");
    WriteU32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : tensor.values()) {
    if (dtype == DType::kF64) {
      WriteF64(out, v);
    } else {
      WriteLe(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  Require(static_cast<bool>(out), ErrorCode::kIo, "failed writing TNSR stream");
}

Tensor ReadTensor(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  Require(in.gcount() == 4 && std::memcmp(magic, kTnsrMagic, 4) == 0,
          ErrorCode::kFormat, "bad TNSR magic");
  const std::uint8_t version = ReadByte(in);
  Require(version == kTnsrVersion, ErrorCode::kFormat,
          "unsupported TNSR version " + std::to_string(version));
  const std::uint8_t dtype = ReadByte(in);
  Require(dtype == 0 || dtype == 1, ErrorCode::kFormat,
          "unknown TNSR dtype code " + std::to_string(dtype));
  const std::uint8_t rank = ReadByte(in);
  Shape shape(rank);
  for (auto& d : shape) {
    d = ReadU32(in);
    Require(d > 0, ErrorCode::kFormat, "zero dimension in TNSR header");
  }
  std::vector<double> values(ShapeSize(shape));
  for (double& v : values) {
    v = dtype == 1 ? ReadF64(in)
                   : static_cast<double>(std::bit_cast<float>(ReadLe<std::uint32_t>(in)));
  }
  return Tensor(std::move(shape), std::move(values));
}

void SaveTensor(const std::filesystem::path& path, const Tensor& tensor,
                DType dtype) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open " + path.string() + " for writing");
  WriteTensor(out, tensor, dtype);
}

Tensor LoadTensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  return ReadTensor(in);
}

}  // namespace sharpnet
