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

#include "sharpnet/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "sharpnet/error.h"
#include "sharpnet/gradcheck.h"

namespace sharpnet {

PreparedSet PrepareSet(std::span<const Sample> samples, std::span<const std::size_t> indices,
                       const SharpNetConfig& config, const BankOptions& bank_options) {
  Require(!indices.empty(), ErrorCode::kData, "cannot prepare an empty sample set");
  std::vector<RgbImage> images;
  PreparedSet set;
  std::vector<Tensor> banks;
  for (std::size_t i : indices) {
    Require(i < samples.size(), ErrorCode::kData, "sample index out of range");
    const Sample& s = samples[i];
    Require(s.image.height == config.input_height && s.image.width == config.input_width,
            ErrorCode::kData,
            "sample " + s.id + " is " + std::to_string(s.image.height) + "x" +
                std::to_string(s.image.width) + ", model expects " +
                std::to_string(config.input_height) + "x" + std::to_string(config.input_width));
    images.push_back(s.image);
    set.masks.push_back(s.mask);
    if (config.injection_enabled) {
      const FeatureBank bank = BuildFeatureBank(
          ToGray(s.image), bank_options.kernels,
          bank_options.refine_with_masks ? &s.mask : nullptr,
          config.LevelHeight(config.injection_level), config.LevelWidth(config.injection_level));
      Require(bank.channel_count() == config.bank_channels, ErrorCode::kConfig,
              "feature bank has " + std::to_string(bank.channel_count()) +
                  " channels, model expects " + std::to_string(config.bank_channels));
      banks.push_back(bank.ToTensor());
    }
  }
  set.images = ImagesToTensor(images);
  set.targets = EncodeOneHot(set.masks, config.num_classes);
  if (!banks.empty()) {
    const Shape& one = banks[0].shape();
    Tensor stacked({banks.size(), one[1], one[2], one[3]});
    for (std::size_t n = 0; n < banks.size(); ++n) {
      std::copy(banks[n].values().begin(), banks[n].values().end(),
                stacked.data() + n * banks[n].size());
    }
    set.banks = std::move(stacked);
  }
  return set;
}

Tensor GatherRows(const Tensor& t, std::span<const std::size_t> indices) {
  Require(t.rank() >= 1 && !indices.empty(), ErrorCode::kInvalidShape, "bad gather");
  Shape shape = t.shape();
  const std::size_t row = t.size() / shape[0];
  shape[0] = indices.size();
  Tensor out(shape);
  for (std::size_t j = 0; j < indices.size(); ++j) {
    Require(indices[j] < t.dim(0), ErrorCode::kInvalidShape, "gather index out of range");
    std::copy_n(t.data() + indices[j] * row, row, out.data() + j * row);
  }
  return out;
}

double TrainStep(SharpNet& net, const Tensor& images, const Tensor& targets,
                 const Tensor* banks) {
  Graph graph;
  BoundNet bound(graph, net);
  std::optional<Var> bank;
  if (net.config().injection_enabled) {
    Require(banks != nullptr, ErrorCode::kContract, "training with injection needs banks");
    bank = graph.Constant(*banks);
  }
  Var loss = SoftmaxCrossEntropy(Forward(bound, graph.Constant(images), bank), targets);
  graph.Backward(loss);
  if (!net.adam_state().has_value()) net.adam_state() = AdamState{};
  AdamStep(net.parameters(), bound.Gradients(), *net.adam_state());
  return loss.value()[0];
}

Evaluation Evaluate(const SharpNet& net, const PreparedSet& set, std::size_t batch_size) {
  Evaluation eval;
  eval.confusion = ConfusionMatrix(net.config().num_classes);
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(set.size(), start + batch_size); ++i) idx.push_back(i);
    const Tensor images = GatherRows(set.images, idx);
    const Tensor targets = GatherRows(set.targets, idx);
    std::optional<Tensor> banks;
    if (set.banks.has_value()) banks = GatherRows(*set.banks, idx);

    Graph graph;
    BoundNet bound(graph, net);
    std::optional<Var> bank;
    if (net.config().injection_enabled && banks.has_value()) bank = graph.Constant(*banks);
    Var logits = Forward(bound, graph.Constant(images), bank);
    loss_sum += SoftmaxCrossEntropy(logits, targets).value()[0] * static_cast<double>(idx.size());
    const std::vector<ClassMap> pred = ArgmaxClasses(logits.value());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      eval.confusion.Merge(Confusion(pred[j], set.masks[idx[j]], net.config().num_classes));
    }
  }
  eval.loss = loss_sum / static_cast<double>(set.size());
  return eval;
}

std::vector<EpochLog> Train(SharpNet& net, const PreparedSet& train, const PreparedSet& val,
                            const TrainOptions& options,
                            const std::function<bool(const EpochLog&)>& on_epoch) {
  Require(options.batch_size >= 1, ErrorCode::kConfig, "batch_size must be >= 1");
  Require(options.epochs >= 1, ErrorCode::kConfig, "epochs must be >= 1");
  if (!net.adam_state().has_value()) net.adam_state() = AdamState{};
  net.adam_state()->config.lr = options.lr;

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochLog> logs;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += options.batch_size) {
      const std::span<const std::size_t> idx(order.data() + b,
                                             std::min(options.batch_size, order.size() - b));
      const Tensor images = GatherRows(train.images, idx);
      const Tensor targets = GatherRows(train.targets, idx);
      std::optional<Tensor> banks;
      if (train.banks.has_value()) banks = GatherRows(*train.banks, idx);
      loss_sum += TrainStep(net, images, targets, banks ? &*banks : nullptr) *
                  static_cast<double>(idx.size());
    }
    const Evaluation v = Evaluate(net, val, options.batch_size);
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(train.size());
    log.val_loss = v.loss;
    log.val_iou = Iou(v.confusion, true).mean;
    log.val_f1 = F1Macro(v.confusion);
    log.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start).count();
    logs.push_back(log);
    if (on_epoch && !on_epoch(log)) break;
  }
  return logs;
}

namespace {

double LossWithTape(const SharpNet& net, const Tensor& image, const Tensor* bank,
                    const Tensor& targets, DecisionTape* tape) {
  Graph graph;
  graph.set_decision_tape(tape);
  BoundNet bound(graph, net);
  std::optional<Var> bank_var;
  if (bank != nullptr && net.config().injection_enabled) bank_var = graph.Constant(*bank);
  return SoftmaxCrossEntropy(Forward(bound, graph.Constant(image), bank_var), targets)
      .value()[0];
}

}  // namespace

GradCheckReport CheckGradients(const SharpNet& net, const Tensor& image, const Tensor* bank,
                               const Tensor& targets, const GradCheckOptions& options) {
  Require(options.step > 0.0, ErrorCode::kConfig, "finite-difference step must be positive");
  GradientMap analytic;
  DecisionTape base(DecisionTape::Mode::kRecord);
  {
    Graph graph;
    graph.set_decision_tape(&base);
    BoundNet bound(graph, net);
    std::optional<Var> bank_var;
    if (bank != nullptr && net.config().injection_enabled) bank_var = graph.Constant(*bank);
    Var loss = SoftmaxCrossEntropy(Forward(bound, graph.Constant(image), bank_var), targets);
    graph.Backward(loss);
    analytic = bound.Gradients();
  }

  SharpNet probe(net.config(), net.parameters());
  const double h = options.step;
  GradCheckReport report;
  auto note = [](double err, const std::string& name, double& worst, std::string& worst_name) {
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  };
  for (auto& [name, tensor] : probe.parameters().entries()) {
    const Tensor& grad = analytic.at(name);
    std::size_t limit = tensor.size();
    if (options.max_per_parameter != 0) limit = std::min(limit, options.max_per_parameter);
    for (std::size_t i = 0; i < limit; ++i) {
      ++report.coordinates;
      const double saved = tensor[i];
      tensor[i] = saved + h;
      const double fp = LossWithTape(probe, image, bank, targets, nullptr);
      tensor[i] = saved - h;
      const double fm = LossWithTape(probe, image, bank, targets, nullptr);
      const double plain = RelativeError(grad[i], (fp - fm) / (2.0 * h));
      note(plain, name, report.worst_plain_error, report.worst_plain_parameter);
      if (plain < options.tolerance) {
        tensor[i] = saved;
        ++report.plain_matches;
        note(plain, name, report.worst_error, report.worst_parameter);
        continue;
      }
      const double noise = kRoundoffUlps * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(fp), std::abs(fm)) / h;
      if (std::abs(grad[i] - (fp - fm) / (2.0 * h)) <= noise) {
        tensor[i] = saved;
        ++report.roundoff_matches;
        continue;
      }

      DecisionTape up, down;
      tensor[i] = saved + h;
      LossWithTape(probe, image, bank, targets, &up);
      tensor[i] = saved - h;
      LossWithTape(probe, image, bank, targets, &down);
      const bool flipped = !(up == base) || !(down == base);
      double pinned = plain;
      if (flipped) {
        DecisionTape replay = base;
        replay.StartReplay();
        tensor[i] = saved + h;
        const double pp = LossWithTape(probe, image, bank, targets, &replay);
        replay.StartReplay();
        tensor[i] = saved - h;
        const double pm = LossWithTape(probe, image, bank, targets, &replay);
        pinned = RelativeError(grad[i], (pp - pm) / (2.0 * h));
      }
      tensor[i] = saved;
      if (flipped && pinned < options.tolerance) {
        ++report.kink_matches;
        note(pinned, name, report.worst_error, report.worst_parameter);
      } else {
        ++report.failures;
        note(pinned, name, report.worst_error, report.worst_parameter);
      }
    }
  }
  return report;
}

}  // namespace sharpnet
