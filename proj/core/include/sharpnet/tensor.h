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

#ifndef SHARPNET_TENSOR_H_
#define SHARPNET_TENSOR_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sharpnet {

using Shape = std::vector<std::size_t>;

std::size_t ShapeSize(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense row-major array of doubles. Image-like data uses N x H x W x C.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double value) { return Tensor({1}, value); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // NHWC accessors; rank must be 4.
  double& at(std::size_t n, std::size_t y, std::size_t x, std::size_t c);
  double at(std::size_t n, std::size_t y, std::size_t x, std::size_t c) const;

  void Fill(double value);
  // Reinterprets the buffer with a new shape of equal element count.
  void Reshape(Shape shape);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  std::size_t Offset4(std::size_t n, std::size_t y, std::size_t x,
                      std::size_t c) const;

  Shape shape_;
  std::vector<double> values_;
};

// Named tensors in insertion order. Names are unique.
class ParameterStore {
 public:
  Tensor& Add(std::string name, Tensor value);

  bool Contains(const std::string& name) const;
  Tensor& Get(const std::string& name);
  const Tensor& Get(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  // Sum of element counts over every entry.
  std::size_t ElementCount() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

using GradientMap = std::map<std::string, Tensor, std::less<>>;

}  // namespace sharpnet

#endif  // SHARPNET_TENSOR_H_
