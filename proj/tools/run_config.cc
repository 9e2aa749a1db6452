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

#include "run_config.h"

#include <cmath>
#include <fstream>
#include <set>

#include "sharpnet/error.h"

namespace sharpnet::cli {
namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& object, const std::set<std::string>& allowed,
                       const std::string& where) {
  Require(object.is_object(), ErrorCode::kConfig, where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    Require(allowed.contains(key), ErrorCode::kConfig, "unknown key '" + key + "' in " + where);
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

}  // namespace

RunConfig::RunConfig() {
  for (const HaarKernel& k : DefaultKernels()) haar.kernels.push_back(k.ToString());
}

std::vector<HaarKernel> RunConfig::Kernels() const {
  std::vector<HaarKernel> kernels;
  for (const std::string& spec : haar.kernels) kernels.push_back(HaarKernel::Parse(spec));
  return kernels;
}

BankOptions RunConfig::Bank() const {
  BankOptions options;
  options.kernels = Kernels();
  options.refine_with_masks = haar.refine_with_masks;
  return options;
}

void RunConfig::SetSeed(std::uint64_t seed) {
  model.seed = seed;
  train.seed = seed;
  data.split.seed = seed;
}

void RunConfig::Validate() const {
  model.Validate();
  Require(!haar.kernels.empty(), ErrorCode::kConfig, "haar.kernels must not be empty");
  const std::vector<HaarKernel> kernels = Kernels();
  Require(!model.injection_enabled || kernels.size() == model.bank_channels, ErrorCode::kConfig,
          "haar.kernels has " + std::to_string(kernels.size()) +
              " entries but model.injection.bank_channels is " +
              std::to_string(model.bank_channels));
  Require(train.epochs >= 1, ErrorCode::kConfig, "train.epochs must be >= 1");
  Require(train.batch_size >= 1, ErrorCode::kConfig, "train.batch_size must be >= 1");
  Require(train.lr > 0.0, ErrorCode::kConfig, "train.lr must be positive");
  Require(haar.threshold_db > 0.0, ErrorCode::kConfig, "haar.threshold_db must be positive");
  const SplitSpec& s = data.split;
  Require(s.train >= 0 && s.val >= 0 && s.test >= 0 &&
              std::abs(s.train + s.val + s.test - 1.0) < 1e-9,
          ErrorCode::kConfig, "data split fractions must be non-negative and sum to 1");
}

json RunConfigToJson(const RunConfig& c) {
  return json{
      {"model", ConfigToJson(c.model)},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"lr", c.train.lr},
        {"seed", c.train.seed}}},
      {"haar",
       {{"kernels", c.haar.kernels},
        {"threshold_db", c.haar.threshold_db},
        {"refine_with_masks", c.haar.refine_with_masks}}},
      {"data",
       {{"root", c.data.root},
        {"train", c.data.split.train},
        {"val", c.data.split.val},
        {"test", c.data.split.test},
        {"seed", c.data.split.seed}}},
  };
}

RunConfig RunConfigFromJson(const json& j) {
  RejectUnknownKeys(j, {"model", "train", "haar", "data"}, "config");
  RunConfig c;
  if (j.contains("model")) c.model = ConfigFromJson(j.at("model"));
  if (j.contains("train")) {
    const json& t = j.at("train");
    RejectUnknownKeys(t, {"epochs", "batch_size", "lr", "seed"}, "train");
    ReadKey(t, "epochs", c.train.epochs, "train");
    ReadKey(t, "batch_size", c.train.batch_size, "train");
    ReadKey(t, "lr", c.train.lr, "train");
    ReadKey(t, "seed", c.train.seed, "train");
  }
  if (j.contains("haar")) {
    const json& h = j.at("haar");
    RejectUnknownKeys(h, {"kernels", "threshold_db", "refine_with_masks"}, "haar");
    ReadKey(h, "kernels", c.haar.kernels, "haar");
    ReadKey(h, "threshold_db", c.haar.threshold_db, "haar");
    ReadKey(h, "refine_with_masks", c.haar.refine_with_masks, "haar");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    RejectUnknownKeys(d, {"root", "train", "val", "test", "seed"}, "data");
    ReadKey(d, "root", c.data.root, "data");
    ReadKey(d, "train", c.data.split.train, "data");
    ReadKey(d, "val", c.data.split.val, "data");
    ReadKey(d, "test", c.data.split.test, "data");
    ReadKey(d, "seed", c.data.split.seed, "data");
  }
  c.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kConfig, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

}  // namespace sharpnet::cli
