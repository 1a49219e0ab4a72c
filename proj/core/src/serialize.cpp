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

#include "efleaf/serialize.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "efleaf/errors.hpp"

namespace efleaf {
namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Non-finite values have no JSON spelling; emit null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bench_config_json(const BenchConfig& c) {
  return {{"pipeline", to_string(c.pipeline)},
          {"batch", c.batch},
          {"seconds", c.seconds},
          {"repetitions", c.repetitions},
          {"warmup", c.warmup},
          {"precision", to_string(c.precision)},
          {"direction", to_string(c.direction)},
          {"workers", c.workers},
          {"seed", c.seed}};
}

json bench_report_json(const BenchReport& r) {
  return {{"config", bench_config_json(r.config)},
          {"examples_per_second", number(r.examples_per_second)},
          {"rep_seconds", r.rep_seconds},
          {"hardware_threads", r.hardware_threads},
          {"timed_backward", r.timed_backward}};
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

std::string to_string(StrideRule rule) {
  return rule == StrideRule::kLowestBand ? "lowest-band" : "finest";
}

StrideRule parse_stride_rule(std::string_view name) {
  if (name == "lowest-band") return StrideRule::kLowestBand;
  if (name == "finest") return StrideRule::kFinest;
  throw ConfigError("unknown stride rule '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (init.n_filters == 0) throw ConfigError("init.n_filters must be positive");
  if (!(init.sample_rate > 0)) throw ConfigError("init.sample_rate must be positive");
  if (!(init.fmin >= 0 && init.fmin < init.fmax))
    throw ConfigError("init: need 0 <= fmin < fmax");
  if (!(init.fmax <= init.sample_rate / 2)) throw ConfigError("init.fmax exceeds Nyquist");
  if (!(init.pool_scale > 0 && init.pool_scale < 1))
    throw ConfigError("init.pool_scale must lie in (0, 1)");
  plan.validate(init.n_filters);
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("run config: expected a JSON object");
  RunConfig cfg;
  static const char* kKeys[] = {"window_max", "hop",        "size_factor", "stride_factor",
                                "n_groups",   "stride_rule", "pipeline",   "compression",
                                "n_filters",  "fmin",        "fmax",       "sample_rate",
                                "pool_scale", "seed"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known |= key == k;
    if (!known) throw ConfigError("run config: unknown key '" + key + "'");
  }
  try {
    take(j, "window_max", cfg.plan.window_max);
    take(j, "hop", cfg.plan.hop);
    take(j, "size_factor", cfg.plan.size_factor);
    take(j, "stride_factor", cfg.plan.stride_factor);
    take(j, "n_groups", cfg.plan.n_groups);
    if (j.contains("stride_rule"))
      cfg.plan.stride_rule = parse_stride_rule(j["stride_rule"].get<std::string>());
    if (j.contains("pipeline")) cfg.pipeline = parse_pipeline_id(j["pipeline"].get<std::string>());
    if (j.contains("compression"))
      cfg.compression = parse_compression(j["compression"].get<std::string>());
    take(j, "n_filters", cfg.init.n_filters);
    take(j, "fmin", cfg.init.fmin);
    take(j, "fmax", cfg.init.fmax);
    take(j, "sample_rate", cfg.init.sample_rate);
    take(j, "pool_scale", cfg.init.pool_scale);
    take(j, "seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string to_json(const RunConfig& c) {
  return dump({{"window_max", c.plan.window_max},
               {"hop", c.plan.hop},
               {"size_factor", c.plan.size_factor},
               {"stride_factor", c.plan.stride_factor},
               {"n_groups", c.plan.n_groups},
               {"stride_rule", to_string(c.plan.stride_rule)},
               {"pipeline", to_string(c.pipeline)},
               {"compression", to_string(c.compression)},
               {"n_filters", c.init.n_filters},
               {"fmin", c.init.fmin},
               {"fmax", c.init.fmax},
               {"sample_rate", c.init.sample_rate},
               {"pool_scale", c.init.pool_scale},
               {"seed", c.seed}});
}

std::string to_json(const GroupPlan& plan) {
  json groups = json::array();
  for (const auto& g : plan.groups)
    groups.push_back({{"lo", g.lo},
                      {"hi", g.hi},
                      {"kernel_size", g.kernel_size},
                      {"conv_stride", g.conv_stride},
                      {"pool_size", g.pool_size},
                      {"pool_stride", g.pool_stride}});
  return dump({{"window_max", plan.window_max}, {"hop", plan.hop}, {"groups", groups}});
}

std::string to_json(const GradCheckReport& r) {
  json entries = json::array();
  double worst = 0.0;
  for (const auto& e : r.entries) {
    worst = std::max(worst, e.rel_error);
    entries.push_back({{"parameter", e.parameter},
                       {"index", e.index},
                       {"analytic", number(e.analytic)},
                       {"numeric", number(e.numeric)},
                       {"rel_error", number(e.rel_error)},
                       {"step", e.step},
                       {"pass", e.pass}});
  }
  return dump({{"entries", entries},
               {"tolerance", r.tolerance},
               {"rel_step", r.rel_step},
               {"rejected", r.rejected},
               {"max_rel_error", number(worst)},
               {"pass", r.pass}});
}

std::string to_json(const BenchReport& r) { return dump(bench_report_json(r)); }

std::string to_json(const BenchComparison& c) {
  json reports = json::array();
  for (const auto& r : c.reports) reports.push_back(bench_report_json(r));
  json speedups = json::array();
  for (const auto& s : c.speedups)
    speedups.push_back(
        {{"numerator", s.numerator}, {"denominator", s.denominator}, {"ratio", number(s.ratio)}});
  return dump({{"reports", reports}, {"speedups", speedups}});
}

std::string to_json(const EquivalenceReport& r) {
  json bands = json::array();
  for (double v : r.per_band_rel_rms) bands.push_back(number(v));
  return dump({{"rel_rms", number(r.rel_rms)},
               {"max_abs", number(r.max_abs)},
               {"per_band_rel_rms", bands},
               {"tolerance", r.tolerance},
               {"margin_frames", r.margin_frames},
               {"pass", r.pass}});
}

std::string to_csv(const BenchComparison& c) {
  std::ostringstream out;
  out.precision(10);
  out << "pipeline,batch,seconds,precision,direction,workers,repetitions,examples_per_second,"
         "median_rep_seconds,hardware_threads\n";
  for (const auto& r : c.reports) {
    const auto& cfg = r.config;
    const double median = cfg.batch / r.examples_per_second;
    out << to_string(cfg.pipeline) << ',' << cfg.batch << ',' << cfg.seconds << ','
        << to_string(cfg.precision) << ',' << to_string(cfg.direction) << ',' << cfg.workers
        << ',' << cfg.repetitions << ',' << r.examples_per_second << ',' << median << ','
        << r.hardware_threads << '\n';
  }
  return out.str();
}

}  // namespace efleaf
