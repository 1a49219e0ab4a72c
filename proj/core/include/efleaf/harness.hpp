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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "efleaf/model.hpp"

namespace efleaf {

// Bound on the relative RMS deviation of the default grouped plan from the
// reference filterbank over interior frames. Generated by
// tools/calibrate_tolerance.py from white noise and data/tone_1s.wav; noise
// alone stays near 0.004, the sparse-spectrum tone reaches 0.021.
inline constexpr double kEquivalenceTolerance = 0.032;

enum class PipelineId { kLeafPcen, kEleafPcen, kEleafLmtbn, kStftMelFixed };
enum class Precision { kSingle, kDouble };
enum class Direction { kForward, kForwardBackward };

PipelineId parse_pipeline_id(std::string_view name);  // throws ConfigError
std::string to_string(PipelineId id);
std::string to_string(Precision p);
std::string to_string(Direction d);

struct BenchConfig {
  PipelineId pipeline = PipelineId::kEleafLmtbn;
  std::size_t batch = 8;
  double seconds = 1.0;
  int repetitions = 5;
  int warmup = 1;
  Precision precision = Precision::kSingle;
  Direction direction = Direction::kForwardBackward;
  int workers = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// "1s" (batch 8), "8s" (batch 1) or "16s" (batch 1): equal audio per batch
  /// for the first two.
  static BenchConfig preset(std::string_view name, PipelineId pipeline);
};

struct BenchReport {
  BenchConfig config;
  double examples_per_second = 0.0;  // median over repetitions
  std::vector<double> rep_seconds;   // raw wall time per repetition
  unsigned hardware_threads = 0;
  bool timed_backward = false;       // false for the fixed STFT baseline
};

struct SpeedupEntry {
  std::string numerator;
  std::string denominator;
  double ratio = 0.0;
};

struct BenchComparison {
  std::vector<BenchReport> reports;
  std::vector<SpeedupEntry> speedups;  // every ordered pair of pipelines

  const BenchReport& report(PipelineId id) const;
  double speedup(PipelineId num, PipelineId den) const;
};

/// Times one configuration. Inputs are seeded white noise synthesized outside
/// the timed region; kernels and plan are built once per run. Throughput is
/// batch / median(rep_seconds).
BenchReport bench(const BenchConfig& cfg, const FrontendParams& params, const PlanConfig& plan);

/// Runs several configurations with repetitions interleaved across them so
/// slow drift affects all pipelines alike.
BenchComparison bench_compare(const std::vector<BenchConfig>& configs,
                              const FrontendParams& params, const PlanConfig& plan);

struct EquivalenceReport {
  double rel_rms = 0.0;
  double max_abs = 0.0;
  std::vector<double> per_band_rel_rms;
  double tolerance = kEquivalenceTolerance;
  std::size_t margin_frames = 0;  // excluded at each end
  bool pass = false;
};

/// Compares pre-compression energy maps of the reference and planned
/// filterbanks: ||A - B|| / ||A|| over interior frames. Throws DomainError
/// if the reference map is all zeros.
EquivalenceReport equivalence(const AudioBatch<double>& audio, const FilterbankParams& bank,
                              const GroupPlan& plan, double tolerance = kEquivalenceTolerance);

template <typename T>
AudioBatch<T> white_noise(std::size_t batch, std::size_t length, double sample_rate,
                          std::uint64_t seed, double amplitude = 0.1);

}  // namespace efleaf
