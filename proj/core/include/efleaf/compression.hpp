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

#include <cstddef>
#include <span>
#include <vector>

#include "efleaf/tensor.hpp"

namespace efleaf {

/// Per-band PCEN parameters; epsilon is fixed and shared.
struct PcenParams {
  std::vector<double> alpha;   // gain normalization exponent, (0, 1]
  std::vector<double> delta;   // bias, > 0
  std::vector<double> root;    // compression exponent r, (0, 1]
  std::vector<double> smooth;  // smoother coefficient s, (0, 1)
  double epsilon = 1e-12;

  static PcenParams defaults(std::size_t bands, double alpha = 0.96, double delta = 2.0,
                             double root = 0.5, double smooth = 0.04);
  std::size_t size() const { return alpha.size(); }
  void validate(std::size_t bands) const;
};

struct BatchNormStats {
  std::vector<double> mean;
  std::vector<double> var;
  bool populated = false;
};

/// Log compression gains and temporal batch-norm state. gamma, beta and the
/// running statistics are indexed [channel * bands + band].
struct LmtbnParams {
  std::vector<double> log_gain;  // a, per band
  std::vector<double> gamma;
  std::vector<double> beta;
  BatchNormStats running;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;

  static constexpr std::size_t kChannels = 2;
  static LmtbnParams defaults(std::size_t bands, double log_gain = 5.0);
  std::size_t bands() const { return log_gain.size(); }
  void validate(std::size_t bands) const;
};

enum class NormMode { kTrain, kEval };

/// PCEN with m_0 = x_0, m_t = (1 - s) m_{t-1} + s x_t and
/// y_t = (x_t / (eps + m_t)^alpha + delta)^r - delta^r, per band.
/// Throws DomainError on negative input.
template <typename T>
FeatureMap<T> pcen(const FeatureMap<T>& x, const PcenParams& p);

/// y = log(1 + 10^a x) with a per band.
template <typename T>
FeatureMap<T> log_compress(const FeatureMap<T>& x, std::span<const double> log_gain);

/// Location of the median inside a sequence: `lo == hi` for odd lengths,
/// otherwise the two central order statistics.
struct MedianPosition {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double value = 0.0;
};

template <typename T>
MedianPosition median_position(std::span<const T> values);

/// Subtracts the per-band median over frames (mean of the two central
/// order statistics for even frame counts).
template <typename T>
FeatureMap<T> median_subtract(const FeatureMap<T>& y);

/// Channel 0 = median-subtracted, channel 1 = original. Both inputs must be
/// single-channel with equal shapes.
template <typename T>
FeatureMap<T> stack_channels(const FeatureMap<T>& original, const FeatureMap<T>& median_subtracted);

/// Batch norm over (batch x frames) per (channel, band). Train mode uses
/// batch statistics and updates p.running; eval mode reads p.running and
/// throws StateError if it was never populated.
template <typename T>
FeatureMap<T> temporal_batch_norm(const FeatureMap<T>& x, LmtbnParams& p, NormMode mode);

/// log_compress -> (median_subtract, identity) -> stack_channels ->
/// temporal_batch_norm. Output is [batch x 2 x bands x frames].
template <typename T>
FeatureMap<T> lmtbn_forward(const FeatureMap<T>& x, LmtbnParams& p, NormMode mode);

}  // namespace efleaf
