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

#include "sharpnet/adam.h"

#include <cmath>

#include "sharpnet/error.h"

namespace sharpnet {

void AdamUpdate(Tensor& param, const Tensor& grad, AdamMoments& moments,
                const AdamConfig& config, std::int64_t t) {
  Require(param.shape() == grad.shape(), ErrorCode::kInvalidShape,
          "adam: gradient shape " + ShapeString(grad.shape()) +
              " does not match parameter " + ShapeString(param.shape()));
  Require(t >= 1, ErrorCode::kContract, "adam step counter must be >= 1");
  if (moments.m.empty()) moments.m = Tensor(param.shape(), 0.0);
  if (moments.v.empty()) moments.v = Tensor(param.shape(), 0.0);
  Require(moments.m.shape() == param.shape() && moments.v.shape() == param.shape(),
          ErrorCode::kInvalidShape, "adam: moment shape mismatch");

  const double td = static_cast<double>(t);
  const double bias1 = 1.0 - std::pow(config.beta1, td);
  const double bias2 = 1.0 - std::pow(config.beta2, td);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    double& m = moments.m[i];
    double& v = moments.v[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    param[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void AdamStep(ParameterStore& params, const GradientMap& grads,
              AdamState& state) {
  ++state.step;
  for (auto& [name, tensor] : params.entries()) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    AdamUpdate(tensor, it->second, state.moments[name], state.config, state.step);
  }
}

}  // namespace sharpnet
