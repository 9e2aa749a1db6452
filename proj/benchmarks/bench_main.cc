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

#include <benchmark/benchmark.h>

#include <random>

#include "sharpnet/autodiff.h"
#include "sharpnet/data.h"
#include "sharpnet/haar.h"
#include "sharpnet/model.h"
#include "sharpnet/train.h"

namespace sharpnet {
namespace {

Tensor Random(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

void BM_PointwiseConv(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  const Tensor x = Random({1, side, side, ch}, 1);
  const Tensor w = Random({ch, ch}, 2), b = Random({ch}, 3);
  for (auto _ : state) {
    Graph g;
    benchmark::DoNotOptimize(PointwiseConv2d(g.Constant(x), g.Constant(w), g.Constant(b)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(side * side * ch * ch));
}
BENCHMARK(BM_PointwiseConv)->Args({64, 32})->Args({32, 128})->Args({16, 512});

void BM_DepthwiseConv(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Tensor x = Random({1, side, side, 64}, 1);
  const Tensor k = Random({3, 3, 64}, 2);
  for (auto _ : state) {
    Graph g;
    benchmark::DoNotOptimize(DepthwiseConv2d(g.Constant(x), g.Constant(k), 1, Padding::kSame));
  }
}
BENCHMARK(BM_DepthwiseConv)->Arg(32)->Arg(128);

void BM_HaarBank(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const std::vector<Sample> samples = GenerateSynthetic(1, side, side, 4, 1);
  const GrayImage gray = ToGray(samples[0].image);
  const std::vector<HaarKernel> kernels = DefaultKernels();
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildFeatureBank(gray, kernels, nullptr, side / 4, side / 4));
  }
}
BENCHMARK(BM_HaarBank)->Arg(64)->Arg(256);

SharpNetConfig DeskConfig() {
  SharpNetConfig c;
  c.input_height = 64;
  c.input_width = 64;
  c.levels = 3;
  c.bottom_up_channels = {16, 32, 64};
  c.pyramid_channels = 32;
  c.num_classes = 4;
  return c;
}

void BM_ForwardLogits(benchmark::State& state) {
  const SharpNetConfig c = DeskConfig();
  const SharpNet net(c);
  const std::vector<Sample> samples = GenerateSynthetic(4, 64, 64, 4, 1);
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  const PreparedSet set = PrepareSet(samples, idx, c, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(ForwardLogits(net, set.images, set.banks ? &*set.banks : nullptr));
  }
}
BENCHMARK(BM_ForwardLogits)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const SharpNetConfig c = DeskConfig();
  SharpNet net(c);
  const std::vector<Sample> samples = GenerateSynthetic(4, 64, 64, 4, 1);
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  const PreparedSet set = PrepareSet(samples, idx, c, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        TrainStep(net, set.images, set.targets, set.banks ? &*set.banks : nullptr));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sharpnet

BENCHMARK_MAIN();
