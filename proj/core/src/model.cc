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

#include "sharpnet/model.h"

#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "sharpnet/error.h"

namespace sharpnet {
namespace {

using nlohmann::json;

constexpr std::size_t kInputChannels = 3;

std::string LevelName(const char* stem, int level) {
  return std::string(stem) + std::to_string(level);
}

void RejectUnknownKeys(const json& object, const std::set<std::string>& allowed,
                       const std::string& where) {
  Require(object.is_object(), ErrorCode::kConfig, where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    Require(allowed.contains(key), ErrorCode::kConfig,
            "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void ReadKey(const json& object, const char* key, T& out, const std::string& where) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, where + "." + key + ": " + e.what());
  }
}

void AddDepthwiseSeparable(std::vector<ParameterSpec>& specs, const std::string& prefix,
                           std::size_t in, std::size_t out, std::size_t k) {
  specs.push_back({prefix + ".dw", {k, k, in}, k * k});
  specs.push_back({prefix + ".pw", {in, out}, in});
  specs.push_back({prefix + ".bias", {out}, 0});
}

void AddPointwise(std::vector<ParameterSpec>& specs, const std::string& prefix,
                  std::size_t in, std::size_t out) {
  specs.push_back({prefix + ".pw", {in, out}, in});
  specs.push_back({prefix + ".bias", {out}, 0});
}

Var Ds(const BoundNet& net, const std::string& prefix, Var x) {
  return DepthwiseSeparableConv(x, net[prefix + ".dw"], net[prefix + ".pw"],
                                net[prefix + ".bias"]);
}

Var Pw(const BoundNet& net, const std::string& prefix, Var x) {
  return PointwiseConv2d(x, net[prefix + ".pw"], net[prefix + ".bias"]);
}

// Uniform [0, 1) from the top 53 bits; portable across standard libraries.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

// ---- config -----------------------------------------------------------------

void SharpNetConfig::Validate() const {
  Require(levels >= 1 && levels <= 16, ErrorCode::kConfig, "levels must be in [1, 16]");
  Require(bottom_up_channels.size() == static_cast<std::size_t>(levels), ErrorCode::kConfig,
          "bottom_up_channels needs one entry per level (" + std::to_string(levels) + ")");
  for (std::size_t c : bottom_up_channels) {
    Require(c > 0 && c % 4 == 0, ErrorCode::kConfig,
            "bottom_up_channels entries must be positive multiples of 4");
  }
  const std::size_t factor = std::size_t{1} << levels;
  Require(input_height > 0 && input_width > 0 && input_height % factor == 0 &&
              input_width % factor == 0,
          ErrorCode::kConfig,
          "input dims must be divisible by 2^levels = " + std::to_string(factor));
  Require(pyramid_channels > 0, ErrorCode::kConfig, "pyramid_channels must be positive");
  Require(num_classes >= 1, ErrorCode::kConfig, "num_classes must be >= 1");
  Require(injection_level >= 1 && injection_level <= levels, ErrorCode::kConfig,
          "injection level must be in [1, levels]");
  Require(bank_channels >= 1, ErrorCode::kConfig, "bank_channels must be >= 1");
  Require(!batch_norm, ErrorCode::kConfig, "batch_norm is not supported");
}

SharpNetConfig SharpNetConfig::Tiny() {
  SharpNetConfig c;
  c.input_height = 16;
  c.input_width = 16;
  c.levels = 2;
  c.bottom_up_channels = {8, 16};
  c.num_classes = 3;
  return c;
}

json ConfigToJson(const SharpNetConfig& c) {
  return json{
      {"input_height", c.input_height},
      {"input_width", c.input_width},
      {"levels", c.levels},
      {"bottom_up_channels", c.bottom_up_channels},
      {"pyramid_channels", c.pyramid_channels},
      {"num_classes", c.num_classes},
      {"injection",
       {{"enabled", c.injection_enabled},
        {"level", c.injection_level},
        {"bank_channels", c.bank_channels},
        {"activation", "logistic"}}},
      {"batch_norm", c.batch_norm},
      {"seed", c.seed},
  };
}

SharpNetConfig ConfigFromJson(const json& j) {
  const std::string where = "model";
  RejectUnknownKeys(j,
                    {"input_height", "input_width", "levels", "bottom_up_channels",
                     "pyramid_channels", "num_classes", "injection", "batch_norm", "seed"},
                    where);
  SharpNetConfig c;
  ReadKey(j, "input_height", c.input_height, where);
  ReadKey(j, "input_width", c.input_width, where);
  ReadKey(j, "levels", c.levels, where);
  ReadKey(j, "bottom_up_channels", c.bottom_up_channels, where);
  ReadKey(j, "pyramid_channels", c.pyramid_channels, where);
  ReadKey(j, "num_classes", c.num_classes, where);
  ReadKey(j, "batch_norm", c.batch_norm, where);
  ReadKey(j, "seed", c.seed, where);
  if (j.contains("injection")) {
    const json& inj = j.at("injection");
    const std::string iw = where + ".injection";
    RejectUnknownKeys(inj, {"enabled", "level", "bank_channels", "activation"}, iw);
    ReadKey(inj, "enabled", c.injection_enabled, iw);
    ReadKey(inj, "level", c.injection_level, iw);
    ReadKey(inj, "bank_channels", c.bank_channels, iw);
    std::string activation = "logistic";
    ReadKey(inj, "activation", activation, iw);
    Require(activation == "logistic", ErrorCode::kConfig,
            "unsupported gate activation '" + activation + "'");
  }
  c.Validate();
  return c;
}

// ---- parameters -------------------------------------------------------------

std::vector<ParameterSpec> ParameterLayout(const SharpNetConfig& config) {
  config.Validate();
  std::vector<ParameterSpec> specs;
  std::size_t in = kInputChannels;
  for (int level = 1; level <= config.levels; ++level) {
    const std::size_t out = config.bottom_up_channels[level - 1];
    const std::size_t branch = out / 4;
    const std::string p = LevelName("bu", level);
    AddDepthwiseSeparable(specs, p + ".b3", in, branch, 3);
    AddDepthwiseSeparable(specs, p + ".b5", in, branch, 5);
    AddPointwise(specs, p + ".pool", in, branch);
    AddPointwise(specs, p + ".b1", in, branch);
    in = out;
  }
  if (config.injection_enabled) {
    const std::size_t level_c = config.bottom_up_channels[config.injection_level - 1];
    AddDepthwiseSeparable(specs, "gate.ds", config.bank_channels, level_c, 3);
    AddPointwise(specs, "gate.proj", level_c, level_c);
  }
  const std::size_t pc = config.pyramid_channels;
  for (int level = 1; level <= config.levels; ++level) {
    const std::string p = LevelName("td", level);
    AddPointwise(specs, p + ".lateral", config.bottom_up_channels[level - 1], pc);
    AddDepthwiseSeparable(specs, p + ".smooth", pc, pc, 3);
  }
  AddPointwise(specs, "classifier", pc, config.num_classes);
  return specs;
}

SharpNet::SharpNet(SharpNetConfig config) : config_(std::move(config)) {
  std::mt19937_64 rng(config_.seed);
  for (const ParameterSpec& spec : ParameterLayout(config_)) {
    Tensor t(spec.shape, 0.0);
    if (spec.fan_in > 0) {
      const double limit = std::sqrt(6.0 / static_cast<double>(spec.fan_in));
      for (double& v : t.values()) v = (2.0 * Uniform01(rng) - 1.0) * limit;
    }
    parameters_.Add(spec.name, std::move(t));
  }
}

SharpNet::SharpNet(SharpNetConfig config, ParameterStore parameters)
    : config_(std::move(config)), parameters_(std::move(parameters)) {
  const auto layout = ParameterLayout(config_);
  Require(layout.size() == parameters_.size(), ErrorCode::kFormat,
          "parameter count does not match the architecture");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& [name, tensor] = parameters_.entries()[i];
    Require(name == layout[i].name && tensor.shape() == layout[i].shape, ErrorCode::kFormat,
            "parameter '" + name + "' does not match layout entry '" + layout[i].name + "'");
  }
}

std::size_t CountParameters(const SharpNet& net) { return net.parameters().ElementCount(); }

std::size_t CountParameters(const SharpNetConfig& config) {
  std::size_t total = 0;
  for (const ParameterSpec& spec : ParameterLayout(config)) total += ShapeSize(spec.shape);
  return total;
}

// ---- bound network ----------------------------------------------------------

BoundNet::BoundNet(Graph& graph, const SharpNet& net)
    : graph_(&graph), config_(&net.config()) {
  for (const auto& [name, tensor] : net.parameters().entries()) {
    vars_.emplace(name, graph.Leaf(tensor));
  }
}

Var BoundNet::operator[](std::string_view name) const {
  auto it = vars_.find(name);
  Require(it != vars_.end(), ErrorCode::kContract,
          "network has no parameter '" + std::string(name) + "'");
  return it->second;
}

GradientMap BoundNet::Gradients() const {
  GradientMap grads;
  for (const auto& [name, var] : vars_) grads.emplace(name, graph_->grad(var));
  return grads;
}

// ---- forward ----------------------------------------------------------------

Var InceptionBlock(const BoundNet& net, std::string_view prefix, Var input,
                   std::size_t out_channels) {
  Require(out_channels % 4 == 0, ErrorCode::kConfig,
          "inception output channels must be divisible by 4");
  const std::string p(prefix);
  const Var branches[] = {
      Relu(Ds(net, p + ".b3", input)),
      Relu(Ds(net, p + ".b5", input)),
      Relu(Pw(net, p + ".pool", MaxPool2d(input, 3, 1, Padding::kSame))),
      Relu(Pw(net, p + ".b1", input)),
  };
  Var out = ConcatChannels(branches);
  Require(out.shape()[3] == out_channels, ErrorCode::kInvalidShape,
          "inception block parameters do not produce " + std::to_string(out_channels) +
              " channels");
  return out;
}

Var InjectionGate(const BoundNet& net, Var level_features, Var bank) {
  const Shape& fs = level_features.shape();
  const Shape& bs = bank.shape();
  Require(bs.size() == 4 && fs.size() == 4 && bs[0] == fs[0] && bs[1] == fs[1] &&
              bs[2] == fs[2],
          ErrorCode::kInvalidShape,
          "feature bank " + ShapeString(bs) + " does not match level features " +
              ShapeString(fs));
  Var hidden = Relu(Ds(net, "gate.ds", bank));
  Var gate = Sigmoid(Pw(net, "gate.proj", hidden));
  return Multiply(level_features, gate);
}

std::vector<Var> BottomUpForward(const BoundNet& net, Var image, std::optional<Var> bank) {
  const SharpNetConfig& config = net.config();
  const Shape& s = image.shape();
  Require(s.size() == 4 && s[1] == config.input_height && s[2] == config.input_width &&
              s[3] == kInputChannels,
          ErrorCode::kInvalidShape,
          "image " + ShapeString(s) + " does not match configured input " +
              std::to_string(config.input_height) + "x" + std::to_string(config.input_width) +
              "x3");
  Require(!config.injection_enabled || bank.has_value(), ErrorCode::kContract,
          "injection is enabled but no feature bank was supplied");

  std::vector<Var> levels;
  Var x = image;
  for (int level = 1; level <= config.levels; ++level) {
    x = InceptionBlock(net, LevelName("bu", level), x, config.bottom_up_channels[level - 1]);
    x = MaxPool2d(x, 2, 2, Padding::kSame);
    if (config.injection_enabled && level == config.injection_level) {
      x = InjectionGate(net, x, *bank);
    }
    levels.push_back(x);
  }
  return levels;
}

std::vector<Var> TopDownForward(const BoundNet& net, std::span<const Var> bottom_up) {
  const int levels = static_cast<int>(bottom_up.size());
  Require(levels >= 1, ErrorCode::kContract, "top-down pathway needs bottom-up levels");
  std::vector<Var> pyramid(levels);
  std::optional<Var> above;
  for (int level = levels; level >= 1; --level) {
    const std::string p = LevelName("td", level);
    Var merged = Pw(net, p + ".lateral", bottom_up[level - 1]);
    if (above.has_value()) merged = Add(UpsampleNearest2x(*above), merged);
    pyramid[level - 1] = Relu(Ds(net, p + ".smooth", merged));
    above = pyramid[level - 1];
  }
  return pyramid;
}

Var ClassifierHead(const BoundNet& net, std::span<const Var> pyramid) {
  Require(!pyramid.empty(), ErrorCode::kContract, "classifier needs pyramid levels");
  const std::size_t out_h = net.config().input_height;
  std::vector<Var> per_level;
  for (Var p : pyramid) {
    Var logits = Pw(net, "classifier", p);
    while (logits.shape()[1] < out_h) logits = UpsampleNearest2x(logits);
    Require(logits.shape()[1] == out_h && logits.shape()[2] == net.config().input_width,
            ErrorCode::kInvalidShape, "pyramid level does not upsample to input size");
    per_level.push_back(logits);
  }
  return Mean(per_level);
}

Var Forward(const BoundNet& net, Var image, std::optional<Var> bank) {
  const std::vector<Var> bottom_up = BottomUpForward(net, image, bank);
  const std::vector<Var> pyramid = TopDownForward(net, bottom_up);
  return ClassifierHead(net, pyramid);
}

Tensor ForwardLogits(const SharpNet& net, const Tensor& image, const Tensor* bank) {
  Graph graph;
  BoundNet bound(graph, net);
  std::optional<Var> bank_var;
  if (bank != nullptr && net.config().injection_enabled) bank_var = graph.Constant(*bank);
  return Forward(bound, graph.Constant(image), bank_var).value();
}

std::vector<ClassMap> ArgmaxClasses(const Tensor& logits) {
  Require(logits.rank() == 4, ErrorCode::kInvalidShape, "argmax expects N x H x W x K");
  const std::size_t n = logits.dim(0), h = logits.dim(1), w = logits.dim(2),
                    k = logits.dim(3);
  std::vector<ClassMap> maps;
  for (std::size_t b = 0; b < n; ++b) {
    ClassMap map(h, w, 0);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double* row = logits.data() + ((b * h + y) * w + x) * k;
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
          if (row[c] > row[best]) best = c;
        }
        map(y, x) = static_cast<int>(best);
      }
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

std::vector<ClassMap> Predict(const SharpNet& net, const Tensor& image, const Tensor* bank) {
  return ArgmaxClasses(ForwardLogits(net, image, bank));
}

}  // namespace sharpnet
