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

#ifndef SHARPNET_ADAM_H_
#define SHARPNET_ADAM_H_

#include <cstdint>
#include <map>
#include <string>

#include "sharpnet/tensor.h"

namespace sharpnet {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  Tensor m;
  Tensor v;
};

// Optimizer state. Moments are created lazily as zeros, keyed by parameter
// name; `step` counts completed updates.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::map<std::string, AdamMoments, std::less<>> moments;
};

// One bias-corrected Adam update of a single tensor at step `t` (t >= 1).
void AdamUpdate(Tensor& param, const Tensor& grad, AdamMoments& moments,
                const AdamConfig& config, std::int64_t t);

// Increments state.step, then updates every parameter that has a gradient.
// Parameters missing from `grads` are left untouched.
void AdamStep(ParameterStore& params, const GradientMap& grads,
              AdamState& state);

}  // namespace sharpnet

#endif  // SHARPNET_ADAM_H_
