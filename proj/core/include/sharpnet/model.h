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

#ifndef SHARPNET_MODEL_H_
#define SHARPNET_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sharpnet/adam.h"
#include "sharpnet/autodiff.h"
#include "sharpnet/image.h"
#include "sharpnet/tensor.h"

namespace sharpnet {

enum class GateActivation { kLogistic };

struct SharpNetConfig {
  std::size_t input_height = 256;
  std::size_t input_width = 256;
  int levels = 4;
  std::vector<std::size_t> bottom_up_channels = {128, 256, 512, 1024};
  std::size_t pyramid_channels = 128;
  std::size_t num_classes = 10;
  bool injection_enabled = true;
  int injection_level = 2;
  std::size_t bank_channels = 5;
  GateActivation gate_activation = GateActivation::kLogistic;
  // Normalization layers are not part of the architecture; only `false` is
  // accepted.
  bool batch_norm = false;
  std::uint64_t seed = 0;

  // Throws kConfig on any violated invariant.
  void Validate() const;

  // Spatial size of bottom-up level `level` (1-based): input / 2^level.
  std::size_t LevelHeight(int level) const { return input_height >> level; }
  std::size_t LevelWidth(int level) const { return input_width >> level; }

  // 16x16 input, levels 2, channels [8, 16], K = 3, injection at level 2.
  static SharpNetConfig Tiny();

  friend bool operator==(const SharpNetConfig&, const SharpNetConfig&) = default;
};

// Unknown keys are rejected; missing keys keep their defaults.
nlohmann::json ConfigToJson(const SharpNetConfig& config);
SharpNetConfig ConfigFromJson(const nlohmann::json& json);

struct ParameterSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in = 0;  // 0 marks a bias (zero-initialized)
};

// Every trainable tensor of the architecture, in a stable order.
std::vector<ParameterSpec> ParameterLayout(const SharpNetConfig& config);

class SharpNet {
 public:
  // Fan-in scaled uniform weights (limit sqrt(6 / fan_in)) drawn from a
  // generator seeded with config.seed; biases zero.
  explicit SharpNet(SharpNetConfig config);
  // Adopts existing parameters; names and shapes must match the layout.
  SharpNet(SharpNetConfig config, ParameterStore parameters);

  const SharpNetConfig& config() const { return config_; }
  const ParameterStore& parameters() const { return parameters_; }
  ParameterStore& parameters() { return parameters_; }

  const std::optional<AdamState>& adam_state() const { return adam_; }
  std::optional<AdamState>& adam_state() { return adam_; }

 private:
  SharpNetConfig config_;
  ParameterStore parameters_;
  std::optional<AdamState> adam_;
};

// Sum of element counts of all named parameters.
std::size_t CountParameters(const SharpNet& net);
std::size_t CountParameters(const SharpNetConfig& config);

// A SharpNet's parameters registered as leaves of one graph.
class BoundNet {
 public:
  BoundNet(Graph& graph, const SharpNet& net);

  Graph& graph() const { return *graph_; }
  const SharpNetConfig& config() const { return *config_; }
  Var operator[](std::string_view name) const;

  // Gradients of every parameter; call after graph().Backward().
  GradientMap Gradients() const;

 private:
  Graph* graph_;
  const SharpNetConfig* config_;
  std::map<std::string, Var, std::less<>> vars_;
};

// Four equal branches of out/4 channels, each ending in ReLU:
// 3x3 DS conv, 5x5 DS conv, 3x3/1 max-pool + 1x1 conv, 1x1 conv.
Var InceptionBlock(const BoundNet& net, std::string_view prefix, Var input,
                   std::size_t out_channels);

// Level outputs C1..CL. `bank` is required when injection is enabled and is
// ignored otherwise.
std::vector<Var> BottomUpForward(const BoundNet& net, Var image,
                                 std::optional<Var> bank);

// features * logistic(1x1(relu(DS3x3(bank)))).
Var InjectionGate(const BoundNet& net, Var level_features, Var bank);

// Pyramid P1..PL with pyramid_channels each; P_i has the dims of C_i.
std::vector<Var> TopDownForward(const BoundNet& net, std::span<const Var> bottom_up);

// Shared 1x1 classifier per level, upsampled to input size, averaged.
Var ClassifierHead(const BoundNet& net, std::span<const Var> pyramid);

Var Forward(const BoundNet& net, Var image, std::optional<Var> bank);

// Graph-free conveniences for inference.
Tensor ForwardLogits(const SharpNet& net, const Tensor& image, const Tensor* bank);
// Per-pixel argmax over the last axis; ties go to the lowest class index.
std::vector<ClassMap> ArgmaxClasses(const Tensor& logits);
std::vector<ClassMap> Predict(const SharpNet& net, const Tensor& image, const Tensor* bank);

}  // namespace sharpnet

#endif  // SHARPNET_MODEL_H_
