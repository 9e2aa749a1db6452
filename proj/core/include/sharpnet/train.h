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

#ifndef SHARPNET_TRAIN_H_
#define SHARPNET_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharpnet/data.h"
#include "sharpnet/haar.h"
#include "sharpnet/metrics.h"
#include "sharpnet/model.h"

namespace sharpnet {

// Network-ready tensors for a set of samples. Feature banks are computed
// once, up front, at the injection level's resolution.
struct PreparedSet {
  Tensor images;                 // N x H x W x 3
  Tensor targets;                // N x H x W x K one-hot
  std::optional<Tensor> banks;   // N x h x w x B when injection is enabled
  std::vector<ClassMap> masks;

  std::size_t size() const { return masks.size(); }
};

struct BankOptions {
  std::vector<HaarKernel> kernels = DefaultKernels();
  bool refine_with_masks = false;
};

PreparedSet PrepareSet(std::span<const Sample> samples, std::span<const std::size_t> indices,
                       const SharpNetConfig& config, const BankOptions& bank_options);

// Rows `indices` of the leading axis.
Tensor GatherRows(const Tensor& t, std::span<const std::size_t> indices);

// One forward/backward/Adam update on a batch; returns the batch loss.
double TrainStep(SharpNet& net, const Tensor& images, const Tensor& targets,
                 const Tensor* banks);

struct Evaluation {
  double loss = 0.0;
  ConfusionMatrix confusion{1};
};

Evaluation Evaluate(const SharpNet& net, const PreparedSet& set, std::size_t batch_size = 4);

struct TrainOptions {
  int epochs = 100;
  std::size_t batch_size = 4;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_iou = 0.0;
  double val_f1 = 0.0;
  double wall_ms = 0.0;
};

// Epoch loop: seeded shuffle, mini-batch Adam steps, validation once per
// epoch. `on_epoch` may return false to stop early.
std::vector<EpochLog> Train(SharpNet& net, const PreparedSet& train, const PreparedSet& val,
                            const TrainOptions& options,
                            const std::function<bool(const EpochLog&)>& on_epoch = nullptr);

inline constexpr double kRoundoffUlps = 16.0;

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  // Caps the number of checked coordinates per parameter; 0 checks all.
  std::size_t max_per_parameter = 0;
};

struct GradCheckReport {
  std::size_t coordinates = 0;
  // Plain central differences within tolerance.
  std::size_t plain_matches = 0;
  // Coordinates where a ReLU or max-pool branch flips inside [x - h, x + h];
  // these are compared against differences taken with the branches pinned to
  // their choice at x.
  std::size_t kink_matches = 0;
  // Gradients so small that |analytic - fd| sits below the rounding noise of
  // the differenced losses, kRoundoffUlps * eps * |loss| / h.
  std::size_t roundoff_matches = 0;
  std::size_t failures = 0;
  double worst_plain_error = 0.0;
  std::string worst_plain_parameter;
  // Largest error among accepted comparisons (plain or pinned).
  double worst_error = 0.0;
  std::string worst_parameter;

  bool passed() const { return failures == 0; }
};

// Reverse-mode gradients of the mean cross-entropy against central
// differences, for every parameter coordinate.
GradCheckReport CheckGradients(const SharpNet& net, const Tensor& image, const Tensor* bank,
                               const Tensor& targets, const GradCheckOptions& options = {});

}  // namespace sharpnet

#endif  // SHARPNET_TRAIN_H_
