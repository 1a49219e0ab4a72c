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

// efleaf command-line tool.
//
//   efleaf plan      [--config run.json] [--size-factor b] [--stride-factor d] [--groups g]
//   efleaf analyze   <wav> -o <features> [--pipeline leaf|eleaf] [--compression ...] [--pgm path]
//   efleaf compare   <wav> [--tolerance t]
//   efleaf bench     [--preset 1s|8s|16s] [--csv]
//   efleaf gradcheck [--seed s] [--seconds t]
//
// Exit status: 0 success, 1 failed check, 2 usage or configuration error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "efleaf/errors.hpp"
#include "efleaf/gradients.hpp"
#include "efleaf/harness.hpp"
#include "efleaf/io.hpp"
#include "efleaf/model.hpp"
#include "efleaf/serialize.hpp"
#include "efleaf/version.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config_path;
  std::optional<double> size_factor;
  std::optional<double> stride_factor;
  std::optional<int> groups;
  bool optimized = false;

  std::string wav;
  std::string out;
  std::string pipeline;
  std::string compression;
  std::string pgm;
  std::size_t pgm_channel = 0;
  bool double_precision = false;

  std::optional<double> tolerance;

  std::string preset = "1s";
  bool csv = false;
  int repetitions = 5;
  int workers = 1;
  std::string direction = "forward-backward";
  std::string precision = "float32";

  std::optional<std::uint64_t> seed;
  double seconds = 0.25;
  std::size_t samples_per_vector = 5;
  double rel_step = 1e-4;
};

efleaf::RunConfig load_config(const Options& o) {
  efleaf::RunConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw efleaf::ConfigError("cannot read config '" + o.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = efleaf::parse_run_config(ss.str());
  }
  if (o.optimized) {
    const auto opt = efleaf::PlanConfig::optimized();
    cfg.plan.size_factor = opt.size_factor;
    cfg.plan.stride_factor = opt.stride_factor;
    cfg.plan.n_groups = opt.n_groups;
  }
  if (o.size_factor) cfg.plan.size_factor = *o.size_factor;
  if (o.stride_factor) cfg.plan.stride_factor = *o.stride_factor;
  if (o.groups) cfg.plan.n_groups = *o.groups;
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

efleaf::FilterbankKind filterbank_of(efleaf::PipelineId id) {
  return id == efleaf::PipelineId::kLeafPcen ? efleaf::FilterbankKind::kLeaf
                                             : efleaf::FilterbankKind::kEfficient;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    efleaf::write_file_atomic(path, text);
  }
}

int cmd_plan(const Options& o) {
  const auto cfg = load_config(o);
  const auto bank = efleaf::init_mel_gabor(cfg.init);
  write_text(o.out, efleaf::to_json(efleaf::plan_groups(bank, cfg.plan)));
  return kOk;
}

template <typename T>
void analyze_as(const efleaf::AudioBatch<double>& audio, const efleaf::PipelineConfig& pc,
                efleaf::FrontendParams& params, const Options& o) {
  const auto map = efleaf::run_frontend(pc, efleaf::cast_audio<T>(audio), params);
  efleaf::write_features(map, o.out);
  if (!o.pgm.empty()) efleaf::render_pgm(map, o.pgm_channel, o.pgm);
}

int cmd_analyze(const Options& o) {
  const auto cfg = load_config(o);
  const auto audio = efleaf::read_wav(o.wav, cfg.init.sample_rate);
  auto params = efleaf::FrontendParams::defaults(cfg.init);
  const auto fb = o.pipeline.empty() ? filterbank_of(cfg.pipeline)
                                     : efleaf::parse_filterbank(o.pipeline);
  const auto comp =
      o.compression.empty() ? cfg.compression : efleaf::parse_compression(o.compression);
  const auto pc = efleaf::PipelineConfig::make(fb, comp, params.filterbank, cfg.plan);
  if (o.double_precision) {
    analyze_as<double>(audio, pc, params, o);
  } else {
    analyze_as<float>(audio, pc, params, o);
  }
  return kOk;
}

int cmd_compare(const Options& o) {
  const auto cfg = load_config(o);
  const auto audio = efleaf::read_wav(o.wav, cfg.init.sample_rate);
  const auto bank = efleaf::init_mel_gabor(cfg.init);
  const auto report = efleaf::equivalence(audio, bank, efleaf::plan_groups(bank, cfg.plan),
                                          o.tolerance.value_or(efleaf::kEquivalenceTolerance));
  std::cout << efleaf::to_json(report);
  return report.pass ? kOk : kCheckFailed;
}

int cmd_bench(const Options& o) {
  const auto cfg = load_config(o);
  const auto params = efleaf::FrontendParams::defaults(cfg.init);
  std::vector<efleaf::BenchConfig> runs;
  for (auto id : {efleaf::PipelineId::kLeafPcen, efleaf::PipelineId::kEleafPcen,
                  efleaf::PipelineId::kEleafLmtbn, efleaf::PipelineId::kStftMelFixed}) {
    auto b = efleaf::BenchConfig::preset(o.preset, id);
    b.repetitions = o.repetitions;
    b.workers = o.workers;
    b.seed = cfg.seed;
    if (o.direction == "forward") {
      b.direction = efleaf::Direction::kForward;
    } else if (o.direction != "forward-backward") {
      throw efleaf::ConfigError("unknown direction '" + o.direction + "'");
    }
    if (o.precision == "float64") {
      b.precision = efleaf::Precision::kDouble;
    } else if (o.precision != "float32") {
      throw efleaf::ConfigError("unknown precision '" + o.precision + "'");
    }
    b.validate();
    runs.push_back(b);
  }
  const auto cmp = efleaf::bench_compare(runs, params, cfg.plan);
  std::cout << (o.csv ? efleaf::to_csv(cmp) : efleaf::to_json(cmp));
  return kOk;
}

int cmd_gradcheck(const Options& o) {
  const auto cfg = load_config(o);
  if (!(o.seconds > 0)) throw efleaf::ConfigError("--seconds must be positive");
  const auto params = efleaf::FrontendParams::defaults(cfg.init);
  const auto fb = o.pipeline.empty() ? filterbank_of(cfg.pipeline)
                                     : efleaf::parse_filterbank(o.pipeline);
  const auto comp =
      o.compression.empty() ? cfg.compression : efleaf::parse_compression(o.compression);
  const auto pc = efleaf::PipelineConfig::make(fb, comp, params.filterbank, cfg.plan);
  const auto length = static_cast<std::size_t>(std::lround(o.seconds * cfg.init.sample_rate));
  const auto audio = efleaf::white_noise<double>(2, length, cfg.init.sample_rate, cfg.seed);
  efleaf::GradCheckOptions opts;
  opts.seed = cfg.seed;
  opts.samples_per_vector = o.samples_per_vector;
  opts.rel_step = o.rel_step;
  const auto report = efleaf::grad_check(pc, audio, params, opts);
  std::cout << efleaf::to_json(report);
  return report.pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable audio frontend: plans, features, equivalence, benchmarks."};
  app.set_version_flag("--version",
                       "efleaf " + efleaf::version() + " (" + efleaf::precision_modes() + ")");
  app.require_subcommand(1);
  Options o;

  auto add_plan_flags = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
    sub->add_option("--size-factor", o.size_factor, "kernel size factor b");
    sub->add_option("--stride-factor", o.stride_factor, "stride factor d");
    sub->add_option("--groups", o.groups, "number of filter groups g");
    sub->add_flag("--optimized", o.optimized, "use g=8, b=6, d=16");
  };

  auto* plan = app.add_subcommand("plan", "print the grouped convolution plan as JSON");
  add_plan_flags(plan);
  plan->add_option("-o,--output", o.out, "write to file instead of stdout");

  auto* analyze = app.add_subcommand("analyze", "compute features for a 16 kHz mono WAV file");
  add_plan_flags(analyze);
  analyze->add_option("wav", o.wav)->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--output", o.out, "feature file")->required();
  analyze->add_option("--pipeline", o.pipeline)->check(CLI::IsMember({"leaf", "eleaf"}));
  analyze->add_option("--compression", o.compression)
      ->check(CLI::IsMember({"pcen", "lmtbn", "none"}));
  analyze->add_option("--pgm", o.pgm, "also render one channel as a PGM image");
  analyze->add_option("--pgm-channel", o.pgm_channel);
  analyze->add_flag("--double", o.double_precision, "float64 features");

  auto* compare = app.add_subcommand("compare", "grouped vs reference filterbank on a WAV file");
  add_plan_flags(compare);
  compare->add_option("wav", o.wav)->required()->check(CLI::ExistingFile);
  compare->add_option("--tolerance", o.tolerance, "relative RMS bound");

  auto* bench = app.add_subcommand("bench", "throughput of all pipelines");
  add_plan_flags(bench);
  bench->add_option("--preset", o.preset)->check(CLI::IsMember({"1s", "8s", "16s"}));
  bench->add_flag("--csv", o.csv, "CSV instead of JSON");
  bench->add_option("--repetitions", o.repetitions)->check(CLI::Range(3, 1000));
  bench->add_option("--workers", o.workers)->check(CLI::Range(1, 256));
  bench->add_option("--direction", o.direction)
      ->check(CLI::IsMember({"forward", "forward-backward"}));
  bench->add_option("--precision", o.precision)->check(CLI::IsMember({"float32", "float64"}));
  bench->add_option("--seed", o.seed);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_plan_flags(gradcheck);
  gradcheck->add_option("--seed", o.seed);
  gradcheck->add_option("--seconds", o.seconds, "noise length per batch item");
  gradcheck->add_option("--pipeline", o.pipeline)->check(CLI::IsMember({"leaf", "eleaf"}));
  gradcheck->add_option("--compression", o.compression)
      ->check(CLI::IsMember({"pcen", "lmtbn", "none"}));
  gradcheck->add_option("--samples", o.samples_per_vector, "scalars per parameter (0 = all)");
  gradcheck->add_option("--rel-step", o.rel_step, "finite-difference step relative to |x|")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*plan) return cmd_plan(o);
    if (*analyze) return cmd_analyze(o);
    if (*compare) return cmd_compare(o);
    if (*bench) return cmd_bench(o);
    if (*gradcheck) return cmd_gradcheck(o);
  } catch (const efleaf::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const efleaf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
