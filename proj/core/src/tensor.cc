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

#include "sharpnet/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "sharpnet/error.h"

namespace sharpnet {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidShape: return "invalid_shape";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kData: return "data";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kNumeric: return "numeric";
  }
  return "unknown";
}

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(ShapeSize(shape_), fill) {
  for (std::size_t d : shape_) {
    Require(d > 0, ErrorCode::kInvalidShape,
            "tensor dimensions must be positive, got " + ShapeString(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (std::size_t d : shape_) {
    Require(d > 0, ErrorCode::kInvalidShape,
            "tensor dimensions must be positive, got " + ShapeString(shape_));
  }
  Require(values_.size() == ShapeSize(shape_), ErrorCode::kInvalidShape,
          "value count " + std::to_string(values_.size()) +
              " does not match shape " + ShapeString(shape_));
}

std::size_t Tensor::Offset4(std::size_t n, std::size_t y, std::size_t x,
                            std::size_t c) const {
  return ((n * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
}

double& Tensor::at(std::size_t n, std::size_t y, std::size_t x, std::size_t c) {
  return values_[Offset4(n, y, x, c)];
}

double Tensor::at(std::size_t n, std::size_t y, std::size_t x,
                  std::size_t c) const {
  return values_[Offset4(n, y, x, c)];
}

void Tensor::Fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void Tensor::Reshape(Shape shape) {
  Require(ShapeSize(shape) == values_.size(), ErrorCode::kInvalidShape,
          "cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
  shape_ = std::move(shape);
}

Tensor& ParameterStore::Add(std::string name, Tensor value) {
  Require(!index_.contains(name), ErrorCode::kContract,
          "duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

bool ParameterStore::Contains(const std::string& name) const {
  return index_.contains(name);
}

Tensor& ParameterStore::Get(const std::string& name) {
  auto it = index_.find(name);
  Require(it != index_.end(), ErrorCode::kContract,
          "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

const Tensor& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  Require(it != index_.end(), ErrorCode::kContract,
          "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParameterStore::ElementCount() const {
  std::size_t total = 0;
  for (const auto& [name, tensor] : entries_) total += tensor.size();
  return total;
}

}  // namespace sharpnet
