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

#ifndef SHARPNET_TOOLS_RUN_CONFIG_H_
#define SHARPNET_TOOLS_RUN_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sharpnet/data.h"
#include "sharpnet/haar.h"
#include "sharpnet/model.h"
#include "sharpnet/train.h"

namespace sharpnet::cli {

struct HaarSection {
  std::vector<std::string> kernels;
  double threshold_db = 18.0;
  bool refine_with_masks = false;
};

struct DataSection {
  std::string root;
  SplitSpec split;
};

struct RunConfig {
  SharpNetConfig model;
  TrainOptions train;
  HaarSection haar;
  DataSection data;

  RunConfig();

  std::vector<HaarKernel> Kernels() const;
  BankOptions Bank() const;
  // Sets the model, train and data seeds.
  void SetSeed(std::uint64_t seed);
  // Throws kConfig on inconsistent sections.
  void Validate() const;
};

// Sections and keys mirror the struct fields; unknown keys throw kConfig,
// missing keys keep their defaults.
nlohmann::json RunConfigToJson(const RunConfig& config);
RunConfig RunConfigFromJson(const nlohmann::json& json);
RunConfig LoadRunConfig(const std::filesystem::path& path);

}  // namespace sharpnet::cli

#endif  // SHARPNET_TOOLS_RUN_CONFIG_H_
