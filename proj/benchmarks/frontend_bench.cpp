// Copyright 2026 The efleaf Authors. All Rights Reserved.
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

// Stage-level microbenchmarks. End-to-end pipeline comparisons with
// interleaved repetitions live in `efleaf bench`.

#include <benchmark/benchmark.h>

#include "efleaf/compression.hpp"
#include "efleaf/gradients.hpp"
#include "efleaf/harness.hpp"
#include "efleaf/model.hpp"
#include "efleaf/pipeline.hpp"
#include "efleaf/stft_mel.hpp"

namespace {

using efleaf::AudioBatch;
using efleaf::FeatureMap;

constexpr double kRate = 16000.0;

const efleaf::FilterbankParams& bank() {
  static const auto b = efleaf::init_mel_gabor(efleaf::MelInitConfig{});
  return b;
}

AudioBatch<float> noise(benchmark::State& state) {
  const auto seconds = static_cast<std::size_t>(state.range(0));
  const auto batch = static_cast<std::size_t>(state.range(1));
  return efleaf::white_noise<float>(batch, seconds * 16000, kRate, 7);
}

void set_counters(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.counters["audio_s"] = benchmark::Counter(
      double(state.range(0) * state.range(1)), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_LeafForward(benchmark::State& state) {
  const auto audio = noise(state);
  for (auto _ : state) benchmark::DoNotOptimize(efleaf::leaf_forward(audio, bank()));
  set_counters(state);
}

void BM_EleafForward(benchmark::State& state) {
  const auto audio = noise(state);
  const auto plan = efleaf::plan_groups(bank(), efleaf::PlanConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(efleaf::eleaf_forward(audio, bank(), plan));
  set_counters(state);
}

void BM_EleafOptimizedForward(benchmark::State& state) {
  const auto audio = noise(state);
  const auto plan = efleaf::plan_groups(bank(), efleaf::PlanConfig::optimized());
  for (auto _ : state) benchmark::DoNotOptimize(efleaf::eleaf_forward(audio, bank(), plan));
  set_counters(state);
}

void BM_StftMel(benchmark::State& state) {
  const auto audio = noise(state);
  efleaf::StftMel<float> stft{efleaf::StftMelConfig{}};
  for (auto _ : state) benchmark::DoNotOptimize(stft.forward(audio));
  set_counters(state);
}

FeatureMap<float> energy_map(benchmark::State& state) {
  const auto audio = noise(state);
  return efleaf::eleaf_forward(audio, bank(), efleaf::plan_groups(bank(), efleaf::PlanConfig{}));
}

void BM_Pcen(benchmark::State& state) {
  const auto e = energy_map(state);
  const auto p = efleaf::PcenParams::defaults(e.bands());
  for (auto _ : state) benchmark::DoNotOptimize(efleaf::pcen(e, p));
  set_counters(state);
}

void BM_Lmtbn(benchmark::State& state) {
  const auto e = energy_map(state);
  auto p = efleaf::LmtbnParams::defaults(e.bands());
  for (auto _ : state) benchmark::DoNotOptimize(efleaf::lmtbn_forward(e, p, efleaf::NormMode::kTrain));
  set_counters(state);
}

template <efleaf::FilterbankKind Fb, efleaf::CompressionKind Comp>
void BM_Backward(benchmark::State& state) {
  const auto audio = noise(state);
  auto params = efleaf::FrontendParams::defaults();
  const auto cfg = efleaf::PipelineConfig::make(Fb, Comp, params.filterbank);
  const auto out = efleaf::run_frontend(cfg, audio, params);
  FeatureMap<float> cot(out.batch(), out.channels(), out.bands(), out.frames());
  for (auto& v : cot.values()) v = 1.0f;
  for (auto _ : state) benchmark::DoNotOptimize(efleaf::backward(cfg, audio, params, cot));
  set_counters(state);
}

using efleaf::CompressionKind;
using efleaf::FilterbankKind;

// Args: {seconds, batch}.
#define EFLEAF_SHAPES ->Args({1, 8})->Args({8, 1})->Unit(benchmark::kMillisecond)

BENCHMARK(BM_LeafForward) EFLEAF_SHAPES;
BENCHMARK(BM_EleafForward) EFLEAF_SHAPES;
BENCHMARK(BM_EleafOptimizedForward) EFLEAF_SHAPES;
BENCHMARK(BM_StftMel) EFLEAF_SHAPES;
BENCHMARK(BM_Pcen) EFLEAF_SHAPES;
BENCHMARK(BM_Lmtbn) EFLEAF_SHAPES;
BENCHMARK(BM_Backward<FilterbankKind::kLeaf, CompressionKind::kPcen>) EFLEAF_SHAPES;
BENCHMARK(BM_Backward<FilterbankKind::kEfficient, CompressionKind::kNone>) EFLEAF_SHAPES;
BENCHMARK(BM_Backward<FilterbankKind::kEfficient, CompressionKind::kPcen>) EFLEAF_SHAPES;
BENCHMARK(BM_Backward<FilterbankKind::kEfficient, CompressionKind::kLmtbn>) EFLEAF_SHAPES;

}  // namespace

BENCHMARK_MAIN();
