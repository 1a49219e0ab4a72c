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

#include "efleaf/plan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "efleaf/errors.hpp"

namespace efleaf {

void PlanConfig::validate(std::size_t n_filters) const {
  if (window_max < 3 || window_max % 2 == 0)
    throw ConfigError("window_max must be odd and >= 3, got " + std::to_string(window_max));
  if (hop < 1) throw ConfigError("hop must be >= 1");
  if (!(size_factor > 0.0)) throw ConfigError("size factor b must be positive");
  if (!(stride_factor > 0.0)) throw ConfigError("stride factor d must be positive");
  if (n_groups < 1) throw ConfigError("need at least one group");
  if (static_cast<std::size_t>(n_groups) > n_filters)
    throw ConfigError("more groups (" + std::to_string(n_groups) + ") than filters (" +
                      std::to_string(n_filters) + ")");
}

const FilterGroup& GroupPlan::group_of(std::size_t filter) const {
  for (const auto& g : groups)
    if (filter >= g.lo && filter < g.hi) return g;
  throw ArgumentError("filter index " + std::to_string(filter) + " not covered by plan");
}

void GroupPlan::validate() const {
  if (groups.empty()) throw ConfigError("plan has no groups");
  if (window_max < 3 || window_max % 2 == 0) throw ConfigError("plan window_max must be odd");
  if (hop < 1) throw ConfigError("plan hop must be >= 1");
  std::size_t expect = 0;
  for (const auto& g : groups) {
    if (g.lo != expect || g.hi <= g.lo) throw ConfigError("plan groups do not partition the bank");
    if (g.kernel_size % 2 == 0 || g.pool_size % 2 == 0 || g.kernel_size < 1 || g.pool_size < 1)
      throw ConfigError("plan kernel and pool sizes must be odd");
    if (g.kernel_size > window_max) throw ConfigError("plan kernel exceeds window_max");
    if (g.conv_stride < 1 || hop % g.conv_stride != 0 || g.conv_stride * g.pool_stride != hop)
      throw ConfigError("plan strides must satisfy conv_stride * pool_stride == hop");
    expect = g.hi;
  }
}

int filter_size(double inv_bandwidth, double size_factor, int window_max) {
  const double raw = std::min(size_factor * inv_bandwidth, double(window_max));
  int size = static_cast<int>(std::lround(raw));
  if (size % 2 == 0) ++size;
  return std::clamp(size, 3, window_max);
}

int filter_stride(double center_freq, double stride_factor, int hop) {
  const double limit = stride_factor * std::numbers::pi / center_freq;
  int best = 1;
  for (int k = 1; k <= hop; ++k)
    if (hop % k == 0 && k <= limit) best = k;
  return best;
}

int pool_size(int window_max, int conv_stride) {
  int size = (window_max + conv_stride - 1) / conv_stride;
  if (size % 2 == 0) ++size;
  return size;
}

GroupPlan plan_groups(const FilterbankParams& params, const PlanConfig& cfg) {
  params.validate();
  const std::size_t n = params.size();
  cfg.validate(n);
  for (std::size_t i = 1; i < n; ++i)
    if (!(params.center_freqs[i] > params.center_freqs[i - 1]))
      throw ConfigError("plan_groups: filters must be sorted by ascending center frequency");

  GroupPlan plan;
  plan.window_max = cfg.window_max;
  plan.hop = cfg.hop;
  const std::size_t g = static_cast<std::size_t>(cfg.n_groups);
  const std::size_t base = n / g;
  const std::size_t extra = n % g;
  std::size_t lo = 0;
  for (std::size_t gi = 0; gi < g; ++gi) {
    FilterGroup grp;
    grp.lo = lo;
    grp.hi = lo + base + (gi < extra ? 1 : 0);
    int stride = 0;
    for (std::size_t i = grp.lo; i < grp.hi; ++i) {
      grp.kernel_size = std::max(
          grp.kernel_size, filter_size(params.inv_bandwidths[i], cfg.size_factor, cfg.window_max));
      const int s = filter_stride(params.center_freqs[i], cfg.stride_factor, cfg.hop);
      if (cfg.stride_rule == StrideRule::kLowestBand)
        stride = (i == grp.lo) ? s : stride;  // sorted, so lo is the lowest band
      else
        stride = (i == grp.lo) ? s : std::min(stride, s);
    }
    grp.conv_stride = stride;
    grp.pool_size = pool_size(cfg.window_max, stride);
    grp.pool_stride = cfg.hop / stride;
    plan.groups.push_back(grp);
    lo = grp.hi;
  }
  plan.validate();
  return plan;
}

GroupPlan reference_plan(std::size_t n_filters, int window_max, int hop) {
  GroupPlan plan;
  plan.window_max = window_max;
  plan.hop = hop;
  plan.groups.push_back({0, n_filters, window_max, 1, window_max, hop});
  plan.validate();
  return plan;
}

}  // namespace efleaf
