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

#include "efleaf/model.hpp"

#include "efleaf/errors.hpp"

namespace efleaf {

FilterbankKind parse_filterbank(std::string_view name) {
  if (name == "leaf") return FilterbankKind::kLeaf;
  if (name == "eleaf") return FilterbankKind::kEfficient;
  throw ConfigError("unknown filterbank '" + std::string(name) + "' (expected leaf|eleaf)");
}

CompressionKind parse_compression(std::string_view name) {
  if (name == "none") return CompressionKind::kNone;
  if (name == "pcen") return CompressionKind::kPcen;
  if (name == "lmtbn") return CompressionKind::kLmtbn;
  throw ConfigError("unknown compression '" + std::string(name) + "' (expected pcen|lmtbn|none)");
}

std::string to_string(FilterbankKind kind) {
  return kind == FilterbankKind::kLeaf ? "leaf" : "eleaf";
}

std::string to_string(CompressionKind kind) {
  switch (kind) {
    case CompressionKind::kNone: return "none";
    case CompressionKind::kPcen: return "pcen";
    case CompressionKind::kLmtbn: return "lmtbn";
  }
  return "none";
}

FrontendParams FrontendParams::defaults(const MelInitConfig& init) {
  FrontendParams p;
  p.filterbank = init_mel_gabor(init);
  p.pcen = PcenParams::defaults(init.n_filters);
  p.lmtbn = LmtbnParams::defaults(init.n_filters);
  return p;
}

PipelineConfig PipelineConfig::make(FilterbankKind fb, CompressionKind comp,
                                    const FilterbankParams& bank, const PlanConfig& cfg) {
  PipelineConfig out;
  out.filterbank = fb;
  out.compression = comp;
  out.plan = fb == FilterbankKind::kLeaf ? reference_plan(bank.size(), cfg.window_max, cfg.hop)
                                         : plan_groups(bank, cfg);
  return out;
}

template <typename T>
FeatureMap<T> frontend_energy(const PipelineConfig& cfg, const AudioBatch<T>& audio,
                              const FilterbankParams& bank) {
  if (cfg.filterbank == FilterbankKind::kLeaf)
    return leaf_forward(audio, bank, cfg.plan.window_max, cfg.plan.hop);
  return eleaf_forward(audio, bank, cfg.plan);
}

template <typename T>
FeatureMap<T> run_frontend(const PipelineConfig& cfg, const AudioBatch<T>& audio,
                           FrontendParams& params) {
  FeatureMap<T> energy = frontend_energy(cfg, audio, params.filterbank);
  switch (cfg.compression) {
    case CompressionKind::kNone: return energy;
    case CompressionKind::kPcen: return pcen(energy, params.pcen);
    case CompressionKind::kLmtbn: return lmtbn_forward(energy, params.lmtbn, cfg.mode);
  }
  return energy;
}

template FeatureMap<float> frontend_energy<float>(const PipelineConfig&, const AudioBatch<float>&,
                                                  const FilterbankParams&);
template FeatureMap<double> frontend_energy<double>(const PipelineConfig&,
                                                    const AudioBatch<double>&,
                                                    const FilterbankParams&);
template FeatureMap<float> run_frontend<float>(const PipelineConfig&, const AudioBatch<float>&,
                                               FrontendParams&);
template FeatureMap<double> run_frontend<double>(const PipelineConfig&, const AudioBatch<double>&,
                                                 FrontendParams&);

}  // namespace efleaf
