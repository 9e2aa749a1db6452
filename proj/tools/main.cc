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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.h"
#include "sharpnet/checkpoint.h"
#include "sharpnet/data.h"
#include "sharpnet/error.h"
#include "sharpnet/haar.h"
#include "sharpnet/metrics.h"
#include "sharpnet/model.h"
#include "sharpnet/tnsr.h"
#include "sharpnet/train.h"

namespace sharpnet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kData:
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
      return kExitData;
    case ErrorCode::kNumeric:
      return kExitNumeric;
    case ErrorCode::kConfig:
    case ErrorCode::kContract:
    case ErrorCode::kInvalidShape:
      return kExitConfig;
  }
  return kExitConfig;
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";

  RunConfig Load() const {
    RunConfig config = config_path.empty() ? RunConfig{} : LoadRunConfig(config_path);
    if (seed.has_value()) config.SetSeed(*seed);
    config.Validate();
    return config;
  }
  fs::path OutDir() const {
    fs::create_directories(out);
    return out;
  }
};

void WriteJson(const fs::path& path, const json& j) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

fs::path DataRoot(const RunConfig& config) {
  Require(!config.data.root.empty(), ErrorCode::kConfig, "data.root is required for this command");
  return config.data.root;
}

Palette DatasetPalette(const RunConfig& config) {
  return LoadPalette(DataRoot(config) / "palette.csv");
}

std::vector<Sample> LoadSamples(const RunConfig& config) {
  std::vector<Sample> samples = LoadDataset(DataRoot(config), DatasetPalette(config));
  Require(!samples.empty(), ErrorCode::kData, "dataset at " + config.data.root + " is empty");
  return samples;
}

// Stacks equally sized maps vertically into one plane.
GrayImage StackRows(const std::vector<GrayImage>& planes) {
  GrayImage out(planes.size() * planes[0].height, planes[0].width);
  std::size_t offset = 0;
  for (const GrayImage& p : planes) {
    Require(p.width == out.width, ErrorCode::kData, "feature maps differ in width");
    std::copy(p.values.begin(), p.values.end(), out.values.begin() + offset);
    offset += p.values.size();
  }
  return out;
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int ExtractFeatures(const Globals& g) {
  const RunConfig config = g.Load();
  const fs::path out = g.OutDir();
  const std::vector<Sample> samples = LoadSamples(config);
  const std::vector<HaarKernel> kernels = config.Kernels();
  const std::size_t h = config.model.LevelHeight(config.model.injection_level);
  const std::size_t w = config.model.LevelWidth(config.model.injection_level);
  for (const Sample& s : samples) {
    const FeatureBank bank =
        BuildFeatureBank(ToGray(s.image), kernels, config.haar.refine_with_masks ? &s.mask : nullptr,
                         h, w);
    SaveTensor(out / (s.id + ".tnsr"), bank.ToTensor());
  }
  WriteJson(out / "features.json", json{{"kernels", config.haar.kernels},
                                        {"height", h},
                                        {"width", w},
                                        {"refine_with_masks", config.haar.refine_with_masks},
                                        {"samples", samples.size()}});
  std::cout << "wrote " << samples.size() << " feature banks to " << out.string() << "\n";
  return kExitOk;
}

int SelectFeatureSet(const Globals& g) {
  const RunConfig config = g.Load();
  const std::vector<Sample> samples = LoadSamples(config);
  const std::vector<HaarKernel> kernels = config.Kernels();
  std::vector<FeatureMap> candidates;
  for (const HaarKernel& k : kernels) {
    std::vector<GrayImage> maps;
    for (const Sample& s : samples) {
      FeatureMap m = ExtractFeature(ToGray(s.image), k);
      if (config.haar.refine_with_masks) m = RefineWithMask(m, s.mask);
      maps.push_back(std::move(m.response));
    }
    FeatureMap stacked;
    stacked.response = StackRows(maps);
    candidates.push_back(std::move(stacked));
  }
  json psnr = json::array();
  for (const FeatureMap& a : candidates) {
    json row = json::array();
    for (const FeatureMap& b : candidates) {
      const double db = Psnr(a.response, b.response, 1.0);
      row.push_back(std::isinf(db) ? json("inf") : json(db));
    }
    psnr.push_back(row);
  }
  json kept = json::array();
  for (std::size_t i : SelectFeatures(candidates, config.haar.threshold_db)) {
    kept.push_back(config.haar.kernels[i]);
  }
  const json report{{"threshold_db", config.haar.threshold_db},
                    {"candidates", config.haar.kernels},
                    {"psnr", psnr},
                    {"kept", kept}};
  WriteJson(g.OutDir() / "selection.json", report);
  std::cout << report.dump() << "\n";
  return kExitOk;
}

int TrainModel(const Globals& g) {
  const RunConfig config = g.Load();
  const fs::path out = g.OutDir();
  const std::vector<Sample> samples = LoadSamples(config);
  const DatasetSplit split = SplitDataset(samples.size(), config.data.split);
  Require(!split.val.empty(), ErrorCode::kData, "validation split is empty");
  const BankOptions bank = config.Bank();
  const PreparedSet train = PrepareSet(samples, split.train, config.model, bank);
  const PreparedSet val = PrepareSet(samples, split.val, config.model, bank);
  WriteJson(out / "config.json", RunConfigToJson(config));

  SharpNet net(config.model);
  std::ofstream log(out / "train_log.jsonl");
  Require(static_cast<bool>(log), ErrorCode::kIo, "cannot write train_log.jsonl");
  double best = -std::numeric_limits<double>::infinity();
  Train(net, train, val, config.train, [&](const EpochLog& e) {
    Require(std::isfinite(e.train_loss), ErrorCode::kNumeric,
            "training loss diverged at epoch " + std::to_string(e.epoch));
    const json line{{"epoch", e.epoch},       {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss}, {"val_iou", NumberOrNull(e.val_iou)},
                    {"val_f1", NumberOrNull(e.val_f1)}, {"wall_ms", e.wall_ms}};
    log << line.dump() << "\n" << std::flush;
    std::cout << line.dump() << "\n";
    if (std::isfinite(e.val_iou) && e.val_iou > best) {
      best = e.val_iou;
      SaveCheckpoint(out / "best.ckpt", net);
    }
    return true;
  });
  if (!std::isfinite(best)) SaveCheckpoint(out / "best.ckpt", net);
  return kExitOk;
}

std::vector<std::size_t> SplitIndices(const DatasetSplit& split, const std::string& which,
                                      std::size_t count) {
  if (which == "train") return split.train;
  if (which == "val") return split.val;
  if (which == "test") return split.test;
  std::vector<std::size_t> all(count);
  for (std::size_t i = 0; i < count; ++i) all[i] = i;
  return all;
}

int EvaluateModel(const Globals& g, const std::string& checkpoint, const std::string& which) {
  const RunConfig config = g.Load();
  const SharpNet net = LoadCheckpoint(checkpoint);
  const std::vector<Sample> samples = LoadSamples(config);
  const DatasetSplit split = SplitDataset(samples.size(), config.data.split);
  const std::vector<std::size_t> indices = SplitIndices(split, which, samples.size());
  const PreparedSet set = PrepareSet(samples, indices, net.config(), config.Bank());
  const Evaluation e = Evaluate(net, set, config.train.batch_size);
  const Palette palette = DatasetPalette(config);
  std::vector<double> ciw;
  if (palette.size() == net.config().num_classes) ciw = palette.Weights();
  json report = MetricsReport(e.confusion, ciw);
  report["loss"] = e.loss;
  report["split"] = which;
  report["samples"] = indices.size();
  WriteJson(g.OutDir() / "metrics.json", report);
  std::cout << report.dump() << "\n";
  return kExitOk;
}

int PredictMask(const Globals& g, const std::string& checkpoint, const std::string& image_path) {
  const RunConfig config = g.Load();
  const SharpNet net = LoadCheckpoint(checkpoint);
  const SharpNetConfig& mc = net.config();
  const RgbImage image = ReadPng(image_path);
  Require(image.height == mc.input_height && image.width == mc.input_width, ErrorCode::kData,
          image_path + " is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
              ", model expects " + std::to_string(mc.input_height) + "x" +
              std::to_string(mc.input_width));
  const std::vector<RgbImage> batch{image};
  std::optional<Tensor> bank;
  if (mc.injection_enabled) {
    const std::vector<HaarKernel> kernels = config.Kernels();
    bank = BuildFeatureBank(ToGray(image), kernels, nullptr, mc.LevelHeight(mc.injection_level),
                            mc.LevelWidth(mc.injection_level))
               .ToTensor();
  }
  const std::vector<ClassMap> maps = Predict(net, ImagesToTensor(batch), bank ? &*bank : nullptr);
  const Palette palette = config.data.root.empty() ? DefaultPalette(mc.num_classes)
                                                   : DatasetPalette(config);
  Require(palette.size() >= mc.num_classes, ErrorCode::kData,
          "palette has fewer entries than the model's classes");
  const fs::path out = g.OutDir() / (fs::path(image_path).stem().string() + "_mask.png");
  WritePng(out, EncodeMask(maps[0], palette));
  std::cout << out.string() << "\n";
  return kExitOk;
}

int CountParams(const Globals& g) {
  std::cout << CountParameters(g.Load().model) << "\n";
  return kExitOk;
}

int GradCheck(const Globals& g, const GradCheckOptions& options) {
  const RunConfig config = g.Load();
  const SharpNetConfig& mc = config.model;
  const SharpNet net(mc);
  const std::vector<Sample> samples =
      GenerateSynthetic(1, mc.input_height, mc.input_width, std::max<std::size_t>(mc.num_classes, 2),
                        mc.seed);
  std::vector<ClassMap> masks{samples[0].mask};
  for (int& v : masks[0].values) v %= static_cast<int>(mc.num_classes);
  const std::vector<RgbImage> images{samples[0].image};
  std::optional<Tensor> bank;
  if (mc.injection_enabled) {
    const std::vector<HaarKernel> kernels = config.Kernels();
    bank = BuildFeatureBank(ToGray(images[0]), kernels, nullptr, mc.LevelHeight(mc.injection_level),
                            mc.LevelWidth(mc.injection_level))
               .ToTensor();
  }
  const GradCheckReport r = CheckGradients(net, ImagesToTensor(images), bank ? &*bank : nullptr,
                                           EncodeOneHot(masks, mc.num_classes), options);
  const json report{{"coordinates", r.coordinates},
                    {"plain_matches", r.plain_matches},
                    {"kink_matches", r.kink_matches},
                    {"roundoff_matches", r.roundoff_matches},
                    {"failures", r.failures},
                    {"worst_plain_error", r.worst_plain_error},
                    {"worst_plain_parameter", r.worst_plain_parameter},
                    {"worst_error", r.worst_error},
                    {"worst_parameter", r.worst_parameter},
                    {"tolerance", options.tolerance},
                    {"passed", r.passed()}};
  std::cout << report.dump() << "\n";
  if (!r.passed()) {
    std::cerr << "E:numeric:" << r.failures << " gradient coordinates exceed relative error "
              << options.tolerance << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

struct SyntheticArgs {
  std::size_t count = 8;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t classes = 0;
};

int GenSynthetic(const Globals& g, const SyntheticArgs& args) {
  const RunConfig config = g.Load();
  const std::size_t h = args.height ? args.height : config.model.input_height;
  const std::size_t w = args.width ? args.width : config.model.input_width;
  const std::size_t k = args.classes ? args.classes : config.model.num_classes;
  const std::vector<Sample> samples =
      GenerateSynthetic(args.count, h, w, k, g.seed.value_or(config.data.split.seed));
  SaveDataset(g.OutDir(), samples, DefaultPalette(k));
  std::cout << "wrote " << samples.size() << " samples to " << g.out << "\n";
  return kExitOk;
}

std::string ConfigHelp() {
  return "\nConfig file keys and defaults (--config <path>, JSON):\n" +
         RunConfigToJson(RunConfig{}).dump(2) + "\n";
}

int Run(int argc, char** argv) {
  CLI::App app{"SHARP-Net segmentation toolkit: Haar features, training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(ConfigHelp());

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON run config; omitted keys keep defaults");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Overrides model.seed, train.seed and data.seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  auto* extract = app.add_subcommand("extract-features", "Write per-image Haar feature banks (TNSR1)");
  auto* select = app.add_subcommand("select-features", "PSNR-based greedy selection over haar.kernels");
  auto* train = app.add_subcommand("train", "Train; writes train_log.jsonl and best.ckpt");
  auto* evaluate = app.add_subcommand("evaluate", "Metrics JSON report for a checkpoint");
  auto* predict = app.add_subcommand("predict", "Color-coded mask PNG for one image");
  auto* count = app.add_subcommand("count-params", "Print the trainable parameter count");
  auto* grad = app.add_subcommand("grad-check", "Reverse-mode vs finite-difference gradients");
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic dataset");
  for (CLI::App* sub : app.get_subcommands({})) sub->footer(ConfigHelp());

  std::string checkpoint, split = "test", image;
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--split", split, "Samples to score")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  predict->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  predict->add_option("--image", image, "Input PNG")->required();

  GradCheckOptions gc;
  grad->add_option("--step", gc.step, "Central-difference step")->capture_default_str();
  grad->add_option("--tolerance", gc.tolerance, "Relative error bound")->capture_default_str();
  grad->add_option("--max-per-parameter", gc.max_per_parameter,
                   "Coordinates checked per tensor (0 = all)")
      ->capture_default_str();

  SyntheticArgs syn;
  gen->add_option("--count", syn.count, "Number of samples")->capture_default_str();
  gen->add_option("--height", syn.height, "Image height (default model.input_height)");
  gen->add_option("--width", syn.width, "Image width (default model.input_width)");
  gen->add_option("--classes", syn.classes, "Classes incl. background (default model.num_classes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E:config:" << e.what() << "\n";
    return kExitConfig;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  if (extract->parsed()) return ExtractFeatures(g);
  if (select->parsed()) return SelectFeatureSet(g);
  if (train->parsed()) return TrainModel(g);
  if (evaluate->parsed()) return EvaluateModel(g, checkpoint, split);
  if (predict->parsed()) return PredictMask(g, checkpoint, image);
  if (count->parsed()) return CountParams(g);
  if (grad->parsed()) return GradCheck(g, gc);
  if (gen->parsed()) return GenSynthetic(g, syn);
  return kExitConfig;
}

}  // namespace
}  // namespace sharpnet::cli

int main(int argc, char** argv) {
  try {
    return sharpnet::cli::Run(argc, argv);
  } catch (const sharpnet::Error& e) {
    std::cerr << "E:" << sharpnet::ErrorCodeName(e.code()) << ":" << e.what() << "\n";
    return sharpnet::cli::ExitCodeFor(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "E:io:" << e.what() << "\n";
    return sharpnet::cli::kExitData;
  }
}
