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

#include <string>
#include <string_view>

#include "efleaf/compression.hpp"
#include "efleaf/frontend.hpp"
#include "efleaf/pipeline.hpp"
#include "efleaf/plan.hpp"

namespace efleaf {

enum class FilterbankKind { kLeaf, kEfficient };
enum class CompressionKind { kNone, kPcen, kLmtbn };

FilterbankKind parse_filterbank(std::string_view name);   // "leaf" | "eleaf"
CompressionKind parse_compression(std::string_view name); // "none" | "pcen" | "lmtbn"
std::string to_string(FilterbankKind kind);
std::string to_string(CompressionKind kind);

/// Every learnable of the frontend in one place.
struct FrontendParams {
  FilterbankParams filterbank;
  PcenParams pcen;
  LmtbnParams lmtbn;

  std::size_t bands() const { return filterbank.size(); }
  static FrontendParams defaults(const MelInitConfig& init = {});
};

/// Which filterbank and compression to run. For kLeaf the plan is the
/// reference plan; window and hop always come from the plan.
struct PipelineConfig {
  FilterbankKind filterbank = FilterbankKind::kEfficient;
  CompressionKind compression = CompressionKind::kLmtbn;
  GroupPlan plan;
  NormMode mode = NormMode::kTrain;

  static PipelineConfig make(FilterbankKind fb, CompressionKind comp,
                             const FilterbankParams& bank, const PlanConfig& cfg = {});
};

/// Filterbank and pooling only (the energy map before compression).
template <typename T>
FeatureMap<T> frontend_energy(const PipelineConfig& cfg, const AudioBatch<T>& audio,
                              const FilterbankParams& bank);

/// Full frontend. Train-mode L-M-TBN updates params.lmtbn.running.
template <typename T>
FeatureMap<T> run_frontend(const PipelineConfig& cfg, const AudioBatch<T>& audio,
                           FrontendParams& params);

}  // namespace efleaf
