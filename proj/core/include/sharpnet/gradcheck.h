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

#ifndef SHARPNET_GRADCHECK_H_
#define SHARPNET_GRADCHECK_H_

#include <functional>

#include "sharpnet/tensor.h"

namespace sharpnet {

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every element.
Tensor FiniteDifferenceGrad(const std::function<double(const Tensor&)>& f,
                            Tensor x, double h = 1e-4);

// |a - b| / max(|a|, |b|, floor). The floor keeps gradients that are zero
// up to rounding from reporting unbounded relative error.
double RelativeError(double a, double b, double floor = 1e-8);

}  // namespace sharpnet

#endif  // SHARPNET_GRADCHECK_H_
