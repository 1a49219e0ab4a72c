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

#include "efleaf/gradients.hpp"
#include "efleaf/harness.hpp"
#include "efleaf/model.hpp"
#include "efleaf/plan.hpp"

namespace efleaf {

/// Everything needed to reproduce one CLI run. Absent JSON keys keep their
/// defaults; unknown keys are rejected.
struct RunConfig {
  PlanConfig plan;
  PipelineId pipeline = PipelineId::kEleafLmtbn;
  CompressionKind compression = CompressionKind::kLmtbn;
  MelInitConfig init;
  std::uint64_t seed = 0;

  /// Throws ConfigError on anything the frontend would reject later.
  void validate() const;
};

RunConfig parse_run_config(std::string_view json);
std::string to_json(const RunConfig& cfg);

// All documents use lexicographic key order and two-space indentation.
std::string to_json(const GroupPlan& plan);
std::string to_json(const GradCheckReport& report);
std::string to_json(const BenchReport& report);
std::string to_json(const BenchComparison& comparison);
std::string to_json(const EquivalenceReport& report);

/// Header plus one row per configuration.
std::string to_csv(const BenchComparison& comparison);

std::string to_string(StrideRule rule);
StrideRule parse_stride_rule(std::string_view name);  // "lowest-band" | "finest"

}  // namespace efleaf
