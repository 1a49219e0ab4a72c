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
#include <vector>

#include "efleaf/frontend.hpp"

namespace efleaf {

// How a group picks its convolution stride from its members' strides.
enum class StrideRule {
  // Stride of the group's lowest-frequency filter. Reproduces the published
  // per-group geometry (401//40, 123//4, 69//1 at the default settings).
  kLowestBand,
  // Smallest stride over the group. With a single group this is the
  // reference (stride 1) geometry.
  kFinest,
};

struct PlanConfig {
  int window_max = 401;       // reference kernel and pooling window, odd
  int hop = 160;              // output frame spacing in input samples
  double size_factor = 4.75;  // b: kernel size = b * sigma_c
  double stride_factor = 1.0; // d: conv stride <= d * pi / nu
  int n_groups = 4;           // g
  StrideRule stride_rule = StrideRule::kLowestBand;

  void validate(std::size_t n_filters) const;

  /// g=8, b=6, d=16: the tuned, faster setting.
  static PlanConfig optimized() {
    PlanConfig cfg;
    cfg.size_factor = 6.0;
    cfg.stride_factor = 16.0;
    cfg.n_groups = 8;
    return cfg;
  }
};

struct FilterGroup {
  std::size_t lo = 0;  // first filter index
  std::size_t hi = 0;  // one past the last
  int kernel_size = 0;
  int conv_stride = 0;
  int pool_size = 0;
  int pool_stride = 0;

  std::size_t width() const { return hi - lo; }
  bool operator==(const FilterGroup&) const = default;
};

/// Frozen per-group convolution and pooling geometry.
struct GroupPlan {
  int window_max = 401;
  int hop = 160;
  std::vector<FilterGroup> groups;

  std::size_t n_filters() const { return groups.empty() ? 0 : groups.back().hi; }
  const FilterGroup& group_of(std::size_t filter) const;
  void validate() const;
  bool operator==(const GroupPlan&) const = default;
};

/// Nearest whole sample of b * sigma_c, bumped to the next odd integer and
/// clamped to [3, window_max].
int filter_size(double inv_bandwidth, double size_factor, int window_max);

/// Largest divisor of hop that does not exceed d * pi / nu, at least 1.
int filter_stride(double center_freq, double stride_factor, int hop);

/// window_max / conv_stride rounded up to the next odd integer.
int pool_size(int window_max, int conv_stride);

/// Splits the bank into n_groups contiguous groups (larger groups first) and
/// freezes kernel size, conv stride and the compensated pooling geometry of
/// each. Throws ConfigError if the bank is not sorted by frequency or the
/// configuration is invalid.
GroupPlan plan_groups(const FilterbankParams& params, const PlanConfig& cfg);

/// One group with kernel window_max, stride 1, pooling window_max at hop.
GroupPlan reference_plan(std::size_t n_filters, int window_max = 401, int hop = 160);

}  // namespace efleaf
