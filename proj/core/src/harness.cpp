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

#include "efleaf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <cmath>
#include <random>
#include <thread>

#include "efleaf/errors.hpp"
#include "efleaf/gradients.hpp"
#include "efleaf/stft_mel.hpp"

namespace efleaf {

PipelineId parse_pipeline_id(std::string_view name) {
  if (name == "leaf-pcen") return PipelineId::kLeafPcen;
  if (name == "eleaf-pcen") return PipelineId::kEleafPcen;
  if (name == "eleaf-lmtbn") return PipelineId::kEleafLmtbn;
  if (name == "stft-mel-fixed") return PipelineId::kStftMelFixed;
  throw ConfigError("unknown pipeline id '" + std::string(name) + "'");
}

std::string to_string(PipelineId id) {
  switch (id) {
    case PipelineId::kLeafPcen: return "leaf-pcen";
    case PipelineId::kEleafPcen: return "eleaf-pcen";
    case PipelineId::kEleafLmtbn: return "eleaf-lmtbn";
    case PipelineId::kStftMelFixed: return "stft-mel-fixed";
  }
  return "?";
}

std::string to_string(Precision p) { return p == Precision::kSingle ? "float32" : "float64"; }
std::string to_string(Direction d) {
  return d == Direction::kForward ? "forward" : "forward-backward";
}

void BenchConfig::validate() const {
  if (repetitions < 3) throw ConfigError("bench: need at least 3 repetitions");
  if (warmup < 0) throw ConfigError("bench: warmup must be non-negative");
  if (batch < 1) throw ConfigError("bench: batch must be >= 1");
  if (!(seconds > 0.0)) throw ConfigError("bench: excerpt length must be positive");
  if (workers < 1) throw ConfigError("bench: need at least one worker");
}

BenchConfig BenchConfig::preset(std::string_view name, PipelineId pipeline) {
  BenchConfig cfg;
  cfg.pipeline = pipeline;
  if (name == "1s") {
    cfg.seconds = 1.0;
    cfg.batch = 8;
  } else if (name == "8s") {
    cfg.seconds = 8.0;
    cfg.batch = 1;
  } else if (name == "16s") {
    cfg.seconds = 16.0;
    cfg.batch = 1;
  } else {
    throw ConfigError("unknown bench preset '" + std::string(name) + "' (1s|8s|16s)");
  }
  return cfg;
}

const BenchReport& BenchComparison::report(PipelineId id) const {
  for (const auto& r : reports)
    if (r.config.pipeline == id) return r;
  throw ArgumentError("no benchmark report for " + to_string(id));
}

double BenchComparison::speedup(PipelineId num, PipelineId den) const {
  return report(num).examples_per_second / report(den).examples_per_second;
}

template <typename T>
AudioBatch<T> white_noise(std::size_t batch, std::size_t length, double sample_rate,
                          std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, amplitude);
  AudioBatch<T> audio(batch, length, sample_rate);
  for (auto& v : audio.samples()) v = static_cast<T>(normal(rng));
  return audio;
}

template AudioBatch<float> white_noise<float>(std::size_t, std::size_t, double, std::uint64_t,
                                              double);
template AudioBatch<double> white_noise<double>(std::size_t, std::size_t, double, std::uint64_t,
                                                double);

namespace {

// One prepared benchmark: inputs, parameters and kernels live outside the
// timed call.
class Workload {
 public:
  virtual ~Workload() = default;
  virtual void run() = 0;
};

template <typename T>
class FrontendWorkload : public Workload {
 public:
  FrontendWorkload(const BenchConfig& cfg, const FrontendParams& params, const PlanConfig& plan)
      : backward_(cfg.direction == Direction::kForwardBackward), params_(params) {
    const auto fb = cfg.pipeline == PipelineId::kLeafPcen ? FilterbankKind::kLeaf
                                                          : FilterbankKind::kEfficient;
    const auto comp = cfg.pipeline == PipelineId::kEleafLmtbn ? CompressionKind::kLmtbn
                                                              : CompressionKind::kPcen;
    pipeline_ = PipelineConfig::make(fb, comp, params.filterbank, plan);
    const auto length = static_cast<std::size_t>(std::llround(cfg.seconds * params.filterbank.sample_rate));
    // Split the batch across workers up front.
    const std::size_t workers = std::min<std::size_t>(cfg.workers, cfg.batch);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t items = cfg.batch / workers + (w < cfg.batch % workers ? 1 : 0);
      shards_.push_back(white_noise<T>(items, length, params.filterbank.sample_rate, cfg.seed + w));
      const std::size_t channels = comp == CompressionKind::kLmtbn ? 2 : 1;
      FeatureMap<T> cot(items, channels, params.bands(), ceil_div(length, plan.hop));
      std::ranges::fill(cot.values(), T(1));
      cotangents_.push_back(std::move(cot));
    }
    sinks_.assign(shards_.size(), 0.0);
  }

  void run() override {
    if (shards_.size() == 1) {
      run_shard(0);
      return;
    }
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < shards_.size(); ++w) threads.emplace_back([this, w] { run_shard(w); });
  }

 private:
  void run_shard(std::size_t w) {
    FrontendParams local = params_;
    const auto out = run_frontend(pipeline_, shards_[w], local);
    if (backward_) {
      const auto g = backward(pipeline_, shards_[w], local, cotangents_[w]);
      sinks_[w] += g.center_freqs.empty() ? 0.0 : g.center_freqs[0];
    }
    sinks_[w] += out.values().empty() ? 0.0 : double(out.values()[0]);
  }

  bool backward_;
  FrontendParams params_;
  PipelineConfig pipeline_;
  std::vector<AudioBatch<T>> shards_;
  std::vector<FeatureMap<T>> cotangents_;
  std::vector<double> sinks_;
};

template <typename T>
class StftWorkload : public Workload {
 public:
  StftWorkload(const BenchConfig& cfg, const FrontendParams& params, const PlanConfig& plan) {
    StftMelConfig sc;
    sc.window = plan.window_max;
    sc.hop = plan.hop;
    sc.n_bands = params.bands();
    sc.sample_rate = params.filterbank.sample_rate;
    const auto length = static_cast<std::size_t>(std::llround(cfg.seconds * sc.sample_rate));
    const std::size_t workers = std::min<std::size_t>(cfg.workers, cfg.batch);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t items = cfg.batch / workers + (w < cfg.batch % workers ? 1 : 0);
      shards_.push_back(white_noise<T>(items, length, sc.sample_rate, cfg.seed + w));
      stfts_.emplace_back(sc);
    }
    sinks_.assign(shards_.size(), 0.0);
    lmtbn_ = params.lmtbn;
  }

  void run() override {
    if (shards_.size() == 1) {
      run_shard(0);
      return;
    }
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < shards_.size(); ++w) threads.emplace_back([this, w] { run_shard(w); });
  }

 private:
  void run_shard(std::size_t w) {
    LmtbnParams local = lmtbn_;
    const auto out = lmtbn_forward(stfts_[w].forward(shards_[w]), local, NormMode::kTrain);
    sinks_[w] += out.values().empty() ? 0.0 : double(out.values()[0]);
  }

  std::vector<AudioBatch<T>> shards_;
  std::vector<StftMel<T>> stfts_;
  LmtbnParams lmtbn_;
  std::vector<double> sinks_;
};

std::unique_ptr<Workload> make_workload(const BenchConfig& cfg, const FrontendParams& params,
                                        const PlanConfig& plan) {
  cfg.validate();
  if (cfg.pipeline == PipelineId::kStftMelFixed) {
    if (cfg.precision == Precision::kSingle)
      return std::make_unique<StftWorkload<float>>(cfg, params, plan);
    return std::make_unique<StftWorkload<double>>(cfg, params, plan);
  }
  if (cfg.precision == Precision::kSingle)
    return std::make_unique<FrontendWorkload<float>>(cfg, params, plan);
  return std::make_unique<FrontendWorkload<double>>(cfg, params, plan);
}

double time_once(Workload& w) {
  const auto t0 = std::chrono::steady_clock::now();
  w.run();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BenchReport finish(const BenchConfig& cfg, std::vector<double> reps) {
  BenchReport r;
  r.config = cfg;
  r.rep_seconds = std::move(reps);
  r.examples_per_second = double(cfg.batch) / median(r.rep_seconds);
  r.hardware_threads = std::thread::hardware_concurrency();
  r.timed_backward =
      cfg.direction == Direction::kForwardBackward && cfg.pipeline != PipelineId::kStftMelFixed;
  return r;
}

}  // namespace

BenchReport bench(const BenchConfig& cfg, const FrontendParams& params, const PlanConfig& plan) {
  return bench_compare({cfg}, params, plan).reports.front();
}

BenchComparison bench_compare(const std::vector<BenchConfig>& configs,
                              const FrontendParams& params, const PlanConfig& plan) {
  std::vector<std::unique_ptr<Workload>> loads;
  int reps = 0, warmup = 0;
  for (const auto& c : configs) {
    loads.push_back(make_workload(c, params, plan));
    reps = std::max(reps, c.repetitions);
    warmup = std::max(warmup, c.warmup);
  }
  for (int i = 0; i < warmup; ++i)
    for (std::size_t k = 0; k < loads.size(); ++k)
      if (i < configs[k].warmup) loads[k]->run();
  std::vector<std::vector<double>> times(loads.size());
  for (int i = 0; i < reps; ++i)
    for (std::size_t k = 0; k < loads.size(); ++k)
      if (i < configs[k].repetitions) times[k].push_back(time_once(*loads[k]));

  BenchComparison out;
  for (std::size_t k = 0; k < loads.size(); ++k) out.reports.push_back(finish(configs[k], times[k]));
  for (const auto& a : out.reports)
    for (const auto& b : out.reports)
      if (&a != &b)
        out.speedups.push_back({to_string(a.config.pipeline), to_string(b.config.pipeline),
                                a.examples_per_second / b.examples_per_second});
  return out;
}

EquivalenceReport equivalence(const AudioBatch<double>& audio, const FilterbankParams& bank,
                              const GroupPlan& plan, double tolerance) {
  const auto ref = leaf_forward(audio, bank, plan.window_max, plan.hop);
  const auto fast = eleaf_forward(audio, bank, plan);
  EquivalenceReport rep;
  rep.tolerance = tolerance;
  const std::size_t frames = ref.frames();
  std::size_t margin = ceil_div(plan.window_max - 1, plan.hop);
  if (2 * margin >= frames) margin = 0;
  rep.margin_frames = margin;

  double num = 0.0, den = 0.0;
  std::vector<double> band_num(ref.bands(), 0.0), band_den(ref.bands(), 0.0);
  for (std::size_t b = 0; b < ref.batch(); ++b)
    for (std::size_t band = 0; band < ref.bands(); ++band) {
      const auto a = ref.row(b, 0, band);
      const auto c = fast.row(b, 0, band);
      for (std::size_t f = margin; f < frames - margin; ++f) {
        const double d = a[f] - c[f];
        band_num[band] += d * d;
        band_den[band] += a[f] * a[f];
        rep.max_abs = std::max(rep.max_abs, std::abs(d));
      }
    }
  for (std::size_t band = 0; band < ref.bands(); ++band) {
    num += band_num[band];
    den += band_den[band];
    rep.per_band_rel_rms.push_back(band_den[band] > 0 ? std::sqrt(band_num[band] / band_den[band]) : 0.0);
  }
  if (!(den > 0.0)) throw DomainError("equivalence: reference energy is zero (silent input)");
  rep.rel_rms = std::sqrt(num / den);
  rep.pass = rep.rel_rms <= tolerance;
  return rep;
}

}  // namespace efleaf
