/* Copyright 2026 The FLIGHT-Net Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include "flight/autograd.h"
#include "flight/loss.h"
#include "flight/model.h"
#include "flight/params.h"
#include "flight/random.h"
#include "flight/tensor.h"

namespace flight {
namespace {

Tensor random_input(const Shape& shape, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xB);
  Tensor t(shape);
  for (float& v : t.data()) v = static_cast<float>(uniform(rng, 0.0, 1.0));
  return t;
}

// Args: channels, kernel, image side.
void BM_Conv2dForward(benchmark::State& state) {
  const auto c = state.range(0), k = state.range(1), side = state.range(2);
  const auto x = random_input({1, c, side, side}, 1);
  const auto w = random_input({c, c, k, k}, 2);
  const Tensor b({c}, 0.0f);
  const auto spec = conv_spec(c, c, k);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, b, spec));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Conv2dForward)->Args({8, 3, 128})->Args({24, 3, 128})->Args({24, 5, 128});

void BM_EnhanceForward(benchmark::State& state) {
  const ModelConfig cfg;
  const auto params = init_params(cfg, 0);
  const auto image = random_input({1, 3, state.range(1), state.range(0)}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(enhance(params, cfg, ModelVariant::kFull, image));
  }
}
BENCHMARK(BM_EnhanceForward)->Args({64, 64})->Args({600, 400})->Unit(benchmark::kMillisecond);

// One optimizer-free training step: forward, loss and backward.
void BM_TrainStep(benchmark::State& state) {
  const ModelConfig cfg;
  auto params = init_params(cfg, 0);
  const auto side = state.range(0);
  const auto low = random_input({8, 3, side, side}, 4);
  const auto high = random_input({8, 3, side, side}, 5);
  for (auto _ : state) {
    ag::Tape<float> tape;
    params.zero_grad();
    auto vars = bind_params(tape, params, true);
    auto loss = total_loss(model_forward(tape.constant(low), vars, cfg, ModelVariant::kFull),
                           tape.constant(high), LossWeights{});
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.value()[0]);
  }
}
BENCHMARK(BM_TrainStep)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MsSsim(benchmark::State& state) {
  const auto a = random_input({1, 3, 256, 256}, 6);
  const auto b = random_input({1, 3, 256, 256}, 7);
  for (auto _ : state) {
    ag::Tape<float> tape(false);
    benchmark::DoNotOptimize(ms_ssim(tape.constant(a), tape.constant(b)).value()[0]);
  }
}
BENCHMARK(BM_MsSsim)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace flight

BENCHMARK_MAIN();
