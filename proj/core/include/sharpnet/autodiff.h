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

#ifndef SHARPNET_AUTODIFF_H_
#define SHARPNET_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sharpnet/tensor.h"

namespace sharpnet {

class Graph;

// Branch choices of the piecewise-linear ops (ReLU masks, max-pool winners)
// in the order the ops run. A tape recorded on one graph can be replayed on
// another built by the same code, which evaluates the network with those
// branches held fixed.
class DecisionTape {
 public:
  enum class Mode { kRecord, kReplay };

  explicit DecisionTape(Mode mode = Mode::kRecord) : mode_(mode) {}

  Mode mode() const { return mode_; }
  // Switches to replay from the first entry.
  void StartReplay() {
    mode_ = Mode::kReplay;
    cursor_ = 0;
  }
  std::size_t size() const { return entries_.size(); }

  void Push(std::vector<std::size_t> entry) { entries_.push_back(std::move(entry)); }
  // Next entry in replay order; throws kContract when exhausted or when the
  // entry length differs from `expected_size`.
  const std::vector<std::size_t>& Next(std::size_t expected_size);

  friend bool operator==(const DecisionTape& a, const DecisionTape& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Mode mode_;
  std::size_t cursor_ = 0;
  std::vector<std::vector<std::size_t>> entries_;
};

// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const;
};

enum class Padding { kSame, kValid };

// Append-only tape of operations. Every node's inputs precede it, so a
// reverse scan from the loss is a valid topological order.
//
// A graph is single-threaded. Independent graphs share no state.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t node)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Constant input; never receives a gradient.
  Var Constant(Tensor value);
  // Trainable leaf; receives a gradient when reachable from the loss.
  Var Leaf(Tensor value);

  const Tensor& value(Var v) const;
  // Gradient after Backward(). Zero-filled for leaves the loss ignores.
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const;

  // Reverse-mode sweep. `loss` must hold exactly one element.
  void Backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Optional; not owned. ReLU and max-pool record or replay their branch
  // choices through it.
  void set_decision_tape(DecisionTape* tape) { tape_ = tape; }
  DecisionTape* decision_tape() const { return tape_; }

  // Op-author API. Records a node computed from `inputs`; `backward` reads
  // the node's grad and accumulates into input grads via AccumulateGrad.
  Var Record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
  const Tensor& node_value(std::size_t node) const;
  const Tensor& node_grad(std::size_t node) const;
  const std::vector<std::size_t>& node_inputs(std::size_t node) const;
  bool node_requires_grad(std::size_t node) const;
  // Returns the grad buffer for `node`, allocating zeros on first use.
  Tensor& MutableGrad(std::size_t node);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  DecisionTape* tape_ = nullptr;
};

// ---- differentiable operations -------------------------------------------

// Per-channel k x k convolution. `kernel` is k x k x C.
Var DepthwiseConv2d(Var input, Var kernel, int stride, Padding padding);
// 1x1 convolution: weights C x K, bias K.
Var PointwiseConv2d(Var input, Var weights, Var bias);
// Depth-wise k x k conv (stride 1, same padding) followed by a point-wise
// conv. No activation.
Var DepthwiseSeparableConv(Var input, Var depthwise, Var pointwise, Var bias);
// C*k*k + C*K + K.
std::size_t DepthwiseSeparableParamCount(std::size_t in_channels,
                                         std::size_t out_channels,
                                         std::size_t kernel_size);

Var MaxPool2d(Var input, int window, int stride, Padding padding);
Var UpsampleNearest2x(Var input);

Var Add(Var a, Var b);
Var Multiply(Var a, Var b);
Var Scale(Var a, double factor);
Var ConcatChannels(std::span<const Var> inputs);
Var Relu(Var x);
Var Sigmoid(Var x);
// Scalar sum of all elements.
Var Sum(Var x);
// Elementwise mean of equally shaped tensors.
Var Mean(std::span<const Var> inputs);

// Mean over pixels of -sum_k t_k log softmax(logits)_k, last axis = classes.
Var SoftmaxCrossEntropy(Var logits, const Tensor& targets);

// Non-differentiable helper: per-pixel softmax over the last axis.
Tensor Softmax(const Tensor& logits);

// Output extent of a strided window along one axis.
std::size_t WindowOutputSize(std::size_t in, std::size_t window, int stride,
                             Padding padding);

}  // namespace sharpnet

#endif  // SHARPNET_AUTODIFF_H_
