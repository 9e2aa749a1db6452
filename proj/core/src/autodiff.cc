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

#include "sharpnet/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "gemm.h"
#include "sharpnet/error.h"

namespace sharpnet {
namespace {

void RequireRank(const Tensor& t, std::size_t rank, const char* what) {
  Require(t.rank() == rank, ErrorCode::kInvalidShape,
          std::string(what) + " expects rank " + std::to_string(rank) +
              ", got " + ShapeString(t.shape()));
}

void RequireSameGraph(Var a, Var b) {
  Require(a.graph != nullptr && a.graph == b.graph, ErrorCode::kContract,
          "operands belong to different graphs");
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* what) {
  Require(a.shape() == b.shape(), ErrorCode::kInvalidShape,
          std::string(what) + ": shape mismatch " + ShapeString(a.shape()) +
              " vs " + ShapeString(b.shape()));
}

struct Window {
  std::size_t out;
  std::ptrdiff_t pad_before;
};

Window ComputeWindow(std::size_t in, std::size_t window, int stride,
                     Padding padding) {
  Require(stride >= 1, ErrorCode::kInvalidShape, "stride must be >= 1");
  Require(window >= 1, ErrorCode::kInvalidShape, "window must be >= 1");
  const auto s = static_cast<std::size_t>(stride);
  if (padding == Padding::kValid) {
    Require(window <= in, ErrorCode::kInvalidShape,
            "window " + std::to_string(window) + " exceeds input extent " +
                std::to_string(in));
    return {(in - window) / s + 1, 0};
  }
  const std::size_t out = (in + s - 1) / s;
  const std::size_t needed = (out - 1) * s + window;
  const std::size_t pad_total = needed > in ? needed - in : 0;
  return {out, static_cast<std::ptrdiff_t>(pad_total / 2)};
}

}  // namespace

std::size_t WindowOutputSize(std::size_t in, std::size_t window, int stride,
                             Padding padding) {
  return ComputeWindow(in, window, stride, padding).out;
}

const Tensor& Var::value() const { return graph->value(*this); }
const Shape& Var::shape() const { return graph->value(*this).shape(); }

// ---- Graph ------------------------------------------------------------------

const std::vector<std::size_t>& DecisionTape::Next(std::size_t expected_size) {
  Require(cursor_ < entries_.size(), ErrorCode::kContract, "decision tape exhausted");
  const std::vector<std::size_t>& entry = entries_[cursor_++];
  Require(entry.size() == expected_size, ErrorCode::kContract,
          "decision tape entry has " + std::to_string(entry.size()) + " choices, op needs " +
              std::to_string(expected_size));
  return entry;
}

Var Graph::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), {}, nullptr, false});
  return Var{this, nodes_.size() - 1};
}

Var Graph::Leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), {}, nullptr, true});
  return Var{this, nodes_.size() - 1};
}

Var Graph::Record(Tensor value, std::vector<std::size_t> inputs,
                  BackwardFn backward) {
  bool needs_grad = false;
  for (std::size_t in : inputs) {
    Require(in < nodes_.size(), ErrorCode::kContract,
            "node input refers to a later node");
    needs_grad = needs_grad || nodes_[in].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(inputs),
                        needs_grad ? std::move(backward) : nullptr, needs_grad});
  return Var{this, nodes_.size() - 1};
}

const Tensor& Graph::value(Var v) const { return node_value(v.id); }

const Tensor& Graph::grad(Var v) const { return node_grad(v.id); }

bool Graph::requires_grad(Var v) const { return node_requires_grad(v.id); }

const Tensor& Graph::node_value(std::size_t node) const {
  Require(node < nodes_.size(), ErrorCode::kContract, "unknown node");
  return nodes_[node].value;
}

const Tensor& Graph::node_grad(std::size_t node) const {
  Require(node < nodes_.size(), ErrorCode::kContract, "unknown node");
  Require(!nodes_[node].grad.empty(), ErrorCode::kContract,
          "node has no gradient; call Backward() first");
  return nodes_[node].grad;
}

const std::vector<std::size_t>& Graph::node_inputs(std::size_t node) const {
  return nodes_.at(node).inputs;
}

bool Graph::node_requires_grad(std::size_t node) const {
  return nodes_.at(node).requires_grad;
}

Tensor& Graph::MutableGrad(std::size_t node) {
  Node& n = nodes_.at(node);
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Graph::Backward(Var loss) {
  Require(loss.graph == this, ErrorCode::kContract,
          "loss belongs to another graph");
  Require(value(loss).size() == 1, ErrorCode::kContract,
          "backward requires a scalar loss, got shape " +
              ShapeString(value(loss).shape()));
  for (Node& n : nodes_) n.grad = Tensor();
  MutableGrad(loss.id).Fill(1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
  // Leaves that the loss does not reach still get an explicit zero grad.
  for (Node& n : nodes_) {
    if (n.requires_grad && n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  }
}

// ---- convolution ------------------------------------------------------------

Var DepthwiseConv2d(Var input, Var kernel, int stride, Padding padding) {
  RequireSameGraph(input, kernel);
  const Tensor& x = input.value();
  const Tensor& k = kernel.value();
  RequireRank(x, 4, "depthwise conv input");
  RequireRank(k, 3, "depthwise conv kernel");
  const std::size_t n_batch = x.dim(0), height = x.dim(1), width = x.dim(2),
                    channels = x.dim(3);
  const std::size_t ksize = k.dim(0);
  Require(k.dim(1) == ksize && ksize % 2 == 1, ErrorCode::kInvalidShape,
          "depthwise kernel must be square with odd size, got " +
              ShapeString(k.shape()));
  Require(k.dim(2) == channels, ErrorCode::kInvalidShape,
          "depthwise kernel has " + std::to_string(k.dim(2)) +
              " channels, input has " + std::to_string(channels));

  const Window wy = ComputeWindow(height, ksize, stride, padding);
  const Window wx = ComputeWindow(width, ksize, stride, padding);
  const auto s = static_cast<std::ptrdiff_t>(stride);
  Tensor out({n_batch, wy.out, wx.out, channels}, 0.0);

  // Visits every (output pixel, in-bounds tap) pair in a fixed order.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t n = 0; n < n_batch; ++n) {
      for (std::size_t oy = 0; oy < wy.out; ++oy) {
        for (std::size_t ox = 0; ox < wx.out; ++ox) {
          const std::size_t o = ((n * wy.out + oy) * wx.out + ox) * channels;
          for (std::size_t ky = 0; ky < ksize; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy) * s + static_cast<std::ptrdiff_t>(ky) - wy.pad_before;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
            for (std::size_t kx = 0; kx < ksize; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox) * s + static_cast<std::ptrdiff_t>(kx) - wx.pad_before;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(width)) continue;
              const std::size_t i =
                  ((n * height + static_cast<std::size_t>(iy)) * width +
                   static_cast<std::size_t>(ix)) * channels;
              fn(o, i, (ky * ksize + kx) * channels);
            }
          }
        }
      }
    }
  };

  {
    double* po = out.data();
    const double* px = x.data();
    const double* pk = k.data();
    for_each_tap([&](std::size_t o, std::size_t i, std::size_t t) {
      for (std::size_t c = 0; c < channels; ++c) po[o + c] += px[i + c] * pk[t + c];
    });
  }

  return input.graph->Record(
      std::move(out), {input.id, kernel.id},
      [for_each_tap, channels](Graph& g, std::size_t node) {
        const auto& ins = g.node_inputs(node);
        const Tensor& grad = g.node_grad(node);
        const Tensor& xv = g.node_value(ins[0]);
        const Tensor& kv = g.node_value(ins[1]);
        const double* pg = grad.data();
        if (g.node_requires_grad(ins[0])) {
          double* pdx = g.MutableGrad(ins[0]).data();
          const double* pk = kv.data();
          for_each_tap([&](std::size_t o, std::size_t i, std::size_t t) {
            for (std::size_t c = 0; c < channels; ++c) pdx[i + c] += pg[o + c] * pk[t + c];
          });
        }
        if (g.node_requires_grad(ins[1])) {
          double* pdk = g.MutableGrad(ins[1]).data();
          const double* px = xv.data();
          for_each_tap([&](std::size_t o, std::size_t i, std::size_t t) {
            for (std::size_t c = 0; c < channels; ++c) pdk[t + c] += pg[o + c] * px[i + c];
          });
        }
      });
}

Var PointwiseConv2d(Var input, Var weights, Var bias) {
  RequireSameGraph(input, weights);
  RequireSameGraph(input, bias);
  const Tensor& x = input.value();
  const Tensor& w = weights.value();
  const Tensor& b = bias.value();
  RequireRank(x, 4, "pointwise conv input");
  RequireRank(w, 2, "pointwise conv weights");
  RequireRank(b, 1, "pointwise conv bias");
  const std::size_t in_c = x.dim(3), out_c = w.dim(1);
  Require(w.dim(0) == in_c, ErrorCode::kInvalidShape,
          "pointwise weights have " + std::to_string(w.dim(0)) +
              " rows, input has " + std::to_string(in_c) + " channels");
  Require(b.dim(0) == out_c, ErrorCode::kInvalidShape,
          "pointwise bias length " + std::to_string(b.dim(0)) +
              " does not match " + std::to_string(out_c) + " outputs");

  const std::size_t pixels = x.dim(0) * x.dim(1) * x.dim(2);
  Tensor out({x.dim(0), x.dim(1), x.dim(2), out_c}, 0.0);
  internal::Gemm(x.data(), w.data(), out.data(), pixels, in_c, out_c, false);
  {
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t k = 0; k < out_c; ++k) po[p * out_c + k] += pb[k];
    }
  }

  return input.graph->Record(
      std::move(out), {input.id, weights.id, bias.id},
      [pixels, in_c, out_c](Graph& g, std::size_t node) {
        const auto& ins = g.node_inputs(node);
        const double* pg = g.node_grad(node).data();
        if (g.node_requires_grad(ins[0])) {
          const std::vector<double> wt =
              internal::Transpose(g.node_value(ins[1]).data(), in_c, out_c);
          internal::Gemm(pg, wt.data(), g.MutableGrad(ins[0]).data(), pixels, out_c,
                         in_c, true);
        }
        if (g.node_requires_grad(ins[1])) {
          const std::vector<double> xt =
              internal::Transpose(g.node_value(ins[0]).data(), pixels, in_c);
          internal::Gemm(xt.data(), pg, g.MutableGrad(ins[1]).data(), in_c, pixels,
                         out_c, true);
        }
        if (g.node_requires_grad(ins[2])) {
          double* pdb = g.MutableGrad(ins[2]).data();
          for (std::size_t p = 0; p < pixels; ++p) {
            const double* grow = pg + p * out_c;
            for (std::size_t k = 0; k < out_c; ++k) pdb[k] += grow[k];
          }
        }
      });
}

Var DepthwiseSeparableConv(Var input, Var depthwise, Var pointwise, Var bias) {
  return PointwiseConv2d(DepthwiseConv2d(input, depthwise, 1, Padding::kSame),
                         pointwise, bias);
}

std::size_t DepthwiseSeparableParamCount(std::size_t in_channels,
                                         std::size_t out_channels,
                                         std::size_t kernel_size) {
  return in_channels * kernel_size * kernel_size + in_channels * out_channels +
         out_channels;
}

// ---- pooling / resampling -----------------------------------------------------

Var MaxPool2d(Var input, int window, int stride, Padding padding) {
  const Tensor& x = input.value();
  RequireRank(x, 4, "max pool input");
  Require(window >= 1, ErrorCode::kInvalidShape, "pool window must be >= 1");
  const std::size_t n_batch = x.dim(0), height = x.dim(1), width = x.dim(2),
                    channels = x.dim(3);
  const auto win = static_cast<std::size_t>(window);
  const Window wy = ComputeWindow(height, win, stride, padding);
  const Window wx = ComputeWindow(width, win, stride, padding);
  const auto s = static_cast<std::ptrdiff_t>(stride);

  Tensor out({n_batch, wy.out, wx.out, channels});
  std::vector<std::size_t> argmax(out.size());
  const double* px = x.data();
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t oy = 0; oy < wy.out; ++oy) {
      for (std::size_t ox = 0; ox < wx.out; ++ox) {
        for (std::size_t c = 0; c < channels; ++c) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_index = 0;
          bool found = false;
          for (std::size_t ky = 0; ky < win; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) * s +
                                      static_cast<std::ptrdiff_t>(ky) - wy.pad_before;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
            for (std::size_t kx = 0; kx < win; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox) * s +
                                        static_cast<std::ptrdiff_t>(kx) - wx.pad_before;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(width)) continue;
              const std::size_t i =
                  ((n * height + static_cast<std::size_t>(iy)) * width +
                   static_cast<std::size_t>(ix)) * channels + c;
              // Strict comparison: the first maximum in row-major scan wins.
              if (!found || px[i] > best) {
                best = px[i];
                best_index = i;
                found = true;
              }
            }
          }
          const std::size_t o = ((n * wy.out + oy) * wx.out + ox) * channels + c;
          out[o] = best;
          argmax[o] = best_index;
        }
      }
    }
  }
  if (DecisionTape* tape = input.graph->decision_tape()) {
    if (tape->mode() == DecisionTape::Mode::kReplay) {
      argmax = tape->Next(argmax.size());
      for (std::size_t o = 0; o < argmax.size(); ++o) {
        Require(argmax[o] < x.size(), ErrorCode::kContract, "replayed pool index out of range");
        out[o] = px[argmax[o]];
      }
    } else {
      tape->Push(argmax);
    }
  }

  return input.graph->Record(
      std::move(out), {input.id},
      [argmax = std::move(argmax)](Graph& g, std::size_t node) {
        const std::size_t in = g.node_inputs(node)[0];
        const double* pg = g.node_grad(node).data();
        double* pdx = g.MutableGrad(in).data();
        for (std::size_t o = 0; o < argmax.size(); ++o) pdx[argmax[o]] += pg[o];
      });
}

Var UpsampleNearest2x(Var input) {
  const Tensor& x = input.value();
  RequireRank(x, 4, "upsample input");
  const std::size_t n_batch = x.dim(0), height = x.dim(1), width = x.dim(2),
                    channels = x.dim(3);
  Tensor out({n_batch, height * 2, width * 2, channels});
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t y = 0; y < height * 2; ++y) {
      for (std::size_t xo = 0; xo < width * 2; ++xo) {
        const double* src = px + ((n * height + y / 2) * width + xo / 2) * channels;
        double* dst = po + ((n * height * 2 + y) * width * 2 + xo) * channels;
        std::copy(src, src + channels, dst);
      }
    }
  }
  return input.graph->Record(
      std::move(out), {input.id},
      [n_batch, height, width, channels](Graph& g, std::size_t node) {
        const std::size_t in = g.node_inputs(node)[0];
        const double* pg = g.node_grad(node).data();
        double* pdx = g.MutableGrad(in).data();
        for (std::size_t n = 0; n < n_batch; ++n) {
          for (std::size_t y = 0; y < height * 2; ++y) {
            for (std::size_t xo = 0; xo < width * 2; ++xo) {
              const double* src = pg + ((n * height * 2 + y) * width * 2 + xo) * channels;
              double* dst = pdx + ((n * height + y / 2) * width + xo / 2) * channels;
              for (std::size_t c = 0; c < channels; ++c) dst[c] += src[c];
            }
          }
        }
      });
}

// ---- elementwise ------------------------------------------------------------

Var Add(Var a, Var b) {
  RequireSameGraph(a, b);
  RequireSameShape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const double* pb = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += pb[i];
  return a.graph->Record(std::move(out), {a.id, b.id},
                         [](Graph& g, std::size_t node) {
                           const Tensor& grad = g.node_grad(node);
                           for (std::size_t in : g.node_inputs(node)) {
                             if (!g.node_requires_grad(in)) continue;
                             Tensor& d = g.MutableGrad(in);
                             for (std::size_t i = 0; i < d.size(); ++i) d[i] += grad[i];
                           }
                         });
}

Var Multiply(Var a, Var b) {
  RequireSameGraph(a, b);
  RequireSameShape(a.value(), b.value(), "multiply");
  Tensor out = a.value();
  const double* pb = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= pb[i];
  return a.graph->Record(
      std::move(out), {a.id, b.id}, [](Graph& g, std::size_t node) {
        const auto& ins = g.node_inputs(node);
        const Tensor& grad = g.node_grad(node);
        for (int side = 0; side < 2; ++side) {
          if (!g.node_requires_grad(ins[side])) continue;
          const Tensor& other = g.node_value(ins[1 - side]);
          Tensor& d = g.MutableGrad(ins[side]);
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += grad[i] * other[i];
        }
      });
}

Var Scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  return a.graph->Record(std::move(out), {a.id},
                         [factor](Graph& g, std::size_t node) {
                           const Tensor& grad = g.node_grad(node);
                           Tensor& d = g.MutableGrad(g.node_inputs(node)[0]);
                           for (std::size_t i = 0; i < d.size(); ++i) d[i] += grad[i] * factor;
                         });
}

Var ConcatChannels(std::span<const Var> inputs) {
  Require(!inputs.empty(), ErrorCode::kInvalidShape, "concat of zero tensors");
  const Tensor& first = inputs[0].value();
  RequireRank(first, 4, "concat input");
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  std::size_t total_c = 0;
  for (const Var& v : inputs) {
    RequireSameGraph(inputs[0], v);
    const Tensor& t = v.value();
    RequireRank(t, 4, "concat input");
    Require(t.dim(0) == first.dim(0) && t.dim(1) == first.dim(1) &&
                t.dim(2) == first.dim(2),
            ErrorCode::kInvalidShape,
            "concat: N/H/W mismatch " + ShapeString(first.shape()) + " vs " +
                ShapeString(t.shape()));
    ids.push_back(v.id);
    widths.push_back(t.dim(3));
    total_c += t.dim(3);
  }
  const std::size_t pixels = first.dim(0) * first.dim(1) * first.dim(2);
  Tensor out({first.dim(0), first.dim(1), first.dim(2), total_c});
  std::size_t offset = 0;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const double* src = inputs[j].value().data();
    for (std::size_t p = 0; p < pixels; ++p) {
      std::copy(src + p * widths[j], src + (p + 1) * widths[j],
                out.data() + p * total_c + offset);
    }
    offset += widths[j];
  }
  return inputs[0].graph->Record(
      std::move(out), std::move(ids),
      [widths, pixels, total_c](Graph& g, std::size_t node) {
        const auto& ins = g.node_inputs(node);
        const double* pg = g.node_grad(node).data();
        std::size_t off = 0;
        for (std::size_t j = 0; j < ins.size(); ++j) {
          if (g.node_requires_grad(ins[j])) {
            double* d = g.MutableGrad(ins[j]).data();
            for (std::size_t p = 0; p < pixels; ++p) {
              for (std::size_t c = 0; c < widths[j]; ++c) {
                d[p * widths[j] + c] += pg[p * total_c + off + c];
              }
            }
          }
          off += widths[j];
        }
      });
}

Var Relu(Var x) {
  DecisionTape* tape = x.graph->decision_tape();
  if (tape == nullptr) {
    Tensor out = x.value();
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return x.graph->Record(std::move(out), {x.id}, [](Graph& g, std::size_t node) {
      const std::size_t in = g.node_inputs(node)[0];
      const Tensor& xin = g.node_value(in);
      const Tensor& grad = g.node_grad(node);
      Tensor& d = g.MutableGrad(in);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (xin[i] > 0.0) d[i] += grad[i];
      }
    });
  }

  const Tensor& xin = x.value();
  std::vector<std::size_t> mask;
  if (tape->mode() == DecisionTape::Mode::kReplay) {
    mask = tape->Next(xin.size());
  } else {
    mask.resize(xin.size());
    for (std::size_t i = 0; i < xin.size(); ++i) mask[i] = xin[i] > 0.0 ? 1 : 0;
    tape->Push(mask);
  }
  Tensor out = xin;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i] == 0) out[i] = 0.0;
  }
  return x.graph->Record(std::move(out), {x.id},
                         [mask = std::move(mask)](Graph& g, std::size_t node) {
                           const Tensor& grad = g.node_grad(node);
                           Tensor& d = g.MutableGrad(g.node_inputs(node)[0]);
                           for (std::size_t i = 0; i < d.size(); ++i) {
                             if (mask[i] != 0) d[i] += grad[i];
                           }
                         });
}

Var Sigmoid(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return x.graph->Record(std::move(out), {x.id}, [](Graph& g, std::size_t node) {
    const Tensor& y = g.node_value(node);
    const Tensor& grad = g.node_grad(node);
    Tensor& d = g.MutableGrad(g.node_inputs(node)[0]);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += grad[i] * y[i] * (1.0 - y[i]);
  });
}

Var Sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.graph->Record(Tensor::Scalar(total), {x.id},
                         [](Graph& g, std::size_t node) {
                           const double seed = g.node_grad(node)[0];
                           Tensor& d = g.MutableGrad(g.node_inputs(node)[0]);
                           for (double& v : d.values()) v += seed;
                         });
}

Var Mean(std::span<const Var> inputs) {
  Require(!inputs.empty(), ErrorCode::kInvalidShape, "mean of zero tensors");
  if (inputs.size() == 1) return inputs[0];
  Var acc = inputs[0];
  for (std::size_t i = 1; i < inputs.size(); ++i) acc = Add(acc, inputs[i]);
  return Scale(acc, 1.0 / static_cast<double>(inputs.size()));
}

// ---- loss -------------------------------------------------------------------

Tensor Softmax(const Tensor& logits) {
  Require(logits.rank() >= 1, ErrorCode::kInvalidShape, "softmax of scalar");
  const std::size_t classes = logits.shape().back();
  const std::size_t pixels = logits.size() / classes;
  Tensor out = logits;
  for (std::size_t p = 0; p < pixels; ++p) {
    double* row = out.data() + p * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      row[k] = std::exp(row[k] - peak);
      denom += row[k];
    }
    for (std::size_t k = 0; k < classes; ++k) row[k] /= denom;
  }
  return out;
}

Var SoftmaxCrossEntropy(Var logits, const Tensor& targets) {
  const Tensor& z = logits.value();
  Require(z.rank() >= 1 && targets.rank() == z.rank() &&
              targets.shape().back() == z.shape().back(),
          ErrorCode::kInvalidShape,
          "cross-entropy: class count mismatch between logits " +
              ShapeString(z.shape()) + " and targets " +
              ShapeString(targets.shape()));
  RequireSameShape(z, targets, "cross-entropy");
  const std::size_t classes = z.shape().back();
  const std::size_t pixels = z.size() / classes;

  Tensor probs(z.shape());
  double total = 0.0;
  for (std::size_t p = 0; p < pixels; ++p) {
    const double* zr = z.data() + p * classes;
    const double* tr = targets.data() + p * classes;
    double tsum = 0.0;
    for (std::size_t k = 0; k < classes; ++k) tsum += tr[k];
    Require(std::abs(tsum - 1.0) < 1e-6, ErrorCode::kContract,
            "cross-entropy targets must sum to 1 per pixel");
    const double peak = *std::max_element(zr, zr + classes);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(zr[k] - peak);
    const double log_denom = std::log(denom);
    double* pr = probs.data() + p * classes;
    for (std::size_t k = 0; k < classes; ++k) {
      const double log_p = zr[k] - peak - log_denom;
      pr[k] = std::exp(log_p);
      if (tr[k] != 0.0) total -= tr[k] * log_p;
    }
  }
  const double inv = 1.0 / static_cast<double>(pixels);

  Graph* graph = logits.graph;
  Var target_node = graph->Constant(targets);
  return graph->Record(
      Tensor::Scalar(total * inv), {logits.id, target_node.id},
      [probs = std::move(probs), classes, pixels, inv](Graph& g, std::size_t node) {
        const auto& ins = g.node_inputs(node);
        const double seed = g.node_grad(node)[0] * inv;
        const Tensor& t = g.node_value(ins[1]);
        Tensor& d = g.MutableGrad(ins[0]);
        for (std::size_t p = 0; p < pixels; ++p) {
          double tsum = 0.0;
          for (std::size_t k = 0; k < classes; ++k) tsum += t[p * classes + k];
          for (std::size_t k = 0; k < classes; ++k) {
            const std::size_t i = p * classes + k;
            d[i] += seed * (probs[i] * tsum - t[i]);
          }
        }
      });
}

}  // namespace sharpnet
