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
#include <functional>
#include <string>
#include <vector>

#include "efleaf/model.hpp"

namespace efleaf {

/// Gradients of a scalar loss with respect to every learnable. Fields of
/// stages that a pipeline does not use are present and zero.
struct ParamGradients {
  std::vector<double> center_freqs;
  std::vector<double> inv_bandwidths;
  std::vector<double> pool_scales;
  std::vector<double> pcen_alpha;
  std::vector<double> pcen_delta;
  std::vector<double> pcen_root;
  std::vector<double> pcen_smooth;
  std::vector<double> log_gain;
  std::vector<double> gamma;  // [channel * bands + band]
  std::vector<double> beta;

  static ParamGradients zeros(std::size_t bands);
};

/// Vector-Jacobian product of the full frontend for a cotangent shaped like
/// its output. Sizes, strides and grouping of the plan are constants; the
/// median routes its gradient to the central element(s). Batch norm uses the
/// statistics selected by cfg.mode and does not touch the running state.
/// Throws ShapeError on a cotangent mismatch and NumericError naming the
/// stage when an intermediate turns non-finite.
template <typename T>
ParamGradients backward(const PipelineConfig& cfg, const AudioBatch<T>& audio,
                        const FrontendParams& params, const FeatureMap<T>& cotangent);

struct GradCheckEntry {
  std::string parameter;  // e.g. "pcen.delta"
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  double step = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 1e-4;
  double rel_step = 1e-4;
  std::size_t rejected = 0;  // perturbations that moved a median and were resampled
  bool pass = false;

  std::vector<GradCheckEntry> failures() const;
};

struct GradCheckOptions {
  std::uint64_t seed = 0;
  std::size_t samples_per_vector = 5;  // 0 checks every scalar
  double rel_step = 1e-4;
  double tolerance = 1e-4;
  double floor = 1e-8;
  // Combine central differences at h and h/2 to cancel the O(h^2) term.
  bool richardson = true;
  // Applied to the analytic gradients before comparison (fault injection).
  std::function<void(ParamGradients&)> tamper;
};

/// Central-difference check of backward() on a seeded random cotangent.
/// Perturbation of parameter x uses step h = rel_step * max(|x|, 1e-2).
/// Failures are reported, never thrown.
GradCheckReport grad_check(const PipelineConfig& cfg, const AudioBatch<double>& audio,
                           const FrontendParams& params, const GradCheckOptions& options = {});

/// Feasible box for learnables.
struct ConstraintBox {
  double min_exponent = 1e-4;    // alpha and r in [min_exponent, 1]
  double min_smooth = 1e-4;      // s in [min_smooth, 1 - min_smooth]
  double min_delta = 1e-6;
  double min_center_freq = 1e-4; // nu in [min, pi - min]
  double min_inv_bandwidth = 1.4987;  // 4 sqrt(2 ln 2) / pi
  double max_inv_bandwidth = 191.85;  // 512 sqrt(2 ln 2) / pi
  double min_pool_scale = 1e-3;  // sigma_p in [min, 1 - min]
};

/// Clamps every learnable into the box. Idempotent.
FrontendParams project_constraints(FrontendParams params, const ConstraintBox& box = {});

}  // namespace efleaf
