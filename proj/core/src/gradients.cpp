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

#include "efleaf/gradients.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "efleaf/errors.hpp"

namespace efleaf {
namespace {

void require_finite(std::span<const double> values, const char* stage) {
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError(stage, "gradient or activation overflowed");
}

template <typename T>
void require_finite_map(const FeatureMap<T>& m, const char* stage) {
  for (T v : m.values())
    if (!std::isfinite(double(v))) throw NumericError(stage, "activation overflowed");
}

// PCEN backward for one band, reverse scan through the smoother.
struct PcenBandGrad {
  double alpha = 0, delta = 0, root = 0, smooth = 0;
};

PcenBandGrad pcen_band_backward(std::span<const double> x, std::span<const double> g,
                                double alpha, double delta, double r, double s, double eps,
                                std::span<double> dx) {
  const std::size_t n = x.size();
  std::vector<double> m(n);
  for (std::size_t t = 0; t < n; ++t) m[t] = (t == 0) ? x[0] : (1.0 - s) * m[t - 1] + s * x[t];

  PcenBandGrad out;
  const double d_offset = r * std::pow(delta, r - 1.0);
  const double offset = std::pow(delta, r);
  const double log_delta = std::log(delta);
  double carry = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double u = eps + m[k];
    const double pw = std::pow(u, -alpha);
    const double q = x[k] * pw;
    const double z = q + delta;
    const double zr = std::pow(z, r);
    const double dq = r * zr / z;  // r z^{r-1}
    const double gk = g[k];
    out.alpha += gk * dq * q * (-std::log(u));
    out.delta += gk * (dq - d_offset);
    out.root += gk * (zr * std::log(z) - offset * log_delta);
    dx[k] += gk * dq * pw;
    const double gm = gk * dq * q * (-alpha) / u + carry;
    if (k > 0) {
      dx[k] += s * gm;
      out.smooth += gm * (x[k] - m[k - 1]);
      carry = (1.0 - s) * gm;
    } else {
      dx[0] += gm;
    }
  }
  return out;
}

// Backward through compression. Returns d(energy) and fills compression
// parameter gradients.
FeatureMap<double> compression_backward(const PipelineConfig& cfg, const FeatureMap<double>& energy,
                                        const FrontendParams& params,
                                        const FeatureMap<double>& cot, ParamGradients& grads) {
  const std::size_t B = energy.batch(), N = energy.bands(), F = energy.frames();
  switch (cfg.compression) {
    case CompressionKind::kNone:
      return cot;

    case CompressionKind::kPcen: {
      const PcenParams& p = params.pcen;
      p.validate(N);
      FeatureMap<double> dx(B, 1, N, F, energy.frame_hop(), energy.sample_rate());
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t band = 0; band < N; ++band) {
          for (double v : energy.row(b, 0, band))
            if (!(v >= 0.0)) throw DomainError("pcen: negative or NaN energy");
          const auto g = pcen_band_backward(energy.row(b, 0, band), cot.row(b, 0, band),
                                            p.alpha[band], p.delta[band], p.root[band],
                                            p.smooth[band], p.epsilon, dx.row(b, 0, band));
          grads.pcen_alpha[band] += g.alpha;
          grads.pcen_delta[band] += g.delta;
          grads.pcen_root[band] += g.root;
          grads.pcen_smooth[band] += g.smooth;
        }
      return dx;
    }

    case CompressionKind::kLmtbn: {
      const LmtbnParams& p = params.lmtbn;
      p.validate(N);
      if (cfg.mode == NormMode::kEval && !p.running.populated)
        throw StateError("temporal_batch_norm: eval mode before any train-mode update");
      const FeatureMap<double> logged = log_compress(energy, p.log_gain);
      std::vector<MedianPosition> medians(B * N);
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t band = 0; band < N; ++band)
          medians[b * N + band] = median_position(logged.row(b, 0, band));
      // Channel 0 is logged minus its median, channel 1 is logged.
      auto shift = [&](std::size_t b, std::size_t c, std::size_t band) {
        return c == 0 ? medians[b * N + band].value : 0.0;
      };

      // Batch norm.
      FeatureMap<double> dstacked(B, 2, N, F);
      const double count = double(B * F);
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t band = 0; band < N; ++band) {
          const std::size_t gi = c * N + band;
          double mean, var;
          if (cfg.mode == NormMode::kTrain) {
            double sum = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
              const double m = shift(b, c, band);
              for (double v : logged.row(b, 0, band)) sum += v - m;
            }
            mean = sum / count;
            double sq = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
              const double m = shift(b, c, band);
              for (double v : logged.row(b, 0, band)) sq += (v - m - mean) * (v - m - mean);
            }
            var = sq / count;
          } else {
            mean = p.running.mean[gi];
            var = p.running.var[gi];
          }
          const double inv_std = 1.0 / std::sqrt(var + p.bn_epsilon);
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t b = 0; b < B; ++b) {
            const double m = shift(b, c, band) + mean;
            const auto xs = logged.row(b, 0, band);
            const auto gs = cot.row(b, c, band);
            for (std::size_t f = 0; f < F; ++f) {
              sum_g += gs[f];
              sum_gx += gs[f] * (xs[f] - m) * inv_std;
            }
          }
          grads.beta[gi] += sum_g;
          grads.gamma[gi] += sum_gx;
          const double scale = p.gamma[gi] * inv_std;
          const bool train = cfg.mode == NormMode::kTrain;
          const double mean_g = train ? sum_g / count : 0.0;
          const double mean_gx = train ? sum_gx / count : 0.0;
          for (std::size_t b = 0; b < B; ++b) {
            const double m = shift(b, c, band) + mean;
            const auto xs = logged.row(b, 0, band);
            const auto gs = cot.row(b, c, band);
            auto ds = dstacked.row(b, c, band);
            for (std::size_t f = 0; f < F; ++f)
              ds[f] = scale * (gs[f] - mean_g - (xs[f] - m) * inv_std * mean_gx);
          }
        }

      // Channel split, median subgradient, log compression.
      FeatureMap<double> dx(B, 1, N, F, energy.frame_hop(), energy.sample_rate());
      std::vector<double> dlog(F);
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t band = 0; band < N; ++band) {
          const auto d0 = dstacked.row(b, 0, band);
          const auto d1 = dstacked.row(b, 1, band);
          double total0 = 0.0;
          for (std::size_t f = 0; f < F; ++f) {
            dlog[f] = d0[f] + d1[f];
            total0 += d0[f];
          }
          const MedianPosition& med = medians[b * N + band];
          if (med.lo == med.hi) {
            dlog[med.lo] -= total0;
          } else {
            dlog[med.lo] -= 0.5 * total0;
            dlog[med.hi] -= 0.5 * total0;
          }
          const double gain = std::pow(10.0, p.log_gain[band]);
          const auto e = energy.row(b, 0, band);
          auto out = dx.row(b, 0, band);
          double dgain = 0.0;
          for (std::size_t f = 0; f < F; ++f) {
            const double denom = 1.0 + gain * e[f];
            out[f] = dlog[f] * gain / denom;
            dgain += dlog[f] * e[f] / denom;
          }
          grads.log_gain[band] += dgain * std::numbers::ln10 * gain;
        }
      return dx;
    }
  }
  return cot;
}

}  // namespace

ParamGradients ParamGradients::zeros(std::size_t bands) {
  ParamGradients g;
  for (auto* v : {&g.center_freqs, &g.inv_bandwidths, &g.pool_scales, &g.pcen_alpha,
                  &g.pcen_delta, &g.pcen_root, &g.pcen_smooth, &g.log_gain})
    v->assign(bands, 0.0);
  g.gamma.assign(LmtbnParams::kChannels * bands, 0.0);
  g.beta.assign(LmtbnParams::kChannels * bands, 0.0);
  return g;
}

template <typename T>
ParamGradients backward(const PipelineConfig& cfg, const AudioBatch<T>& audio,
                        const FrontendParams& params, const FeatureMap<T>& cotangent) {
  const FilterbankParams& bank = params.filterbank;
  bank.validate();
  cfg.plan.validate();
  const std::size_t N = bank.size();
  if (cfg.plan.n_filters() != N) throw ConfigError("backward: plan and bank sizes differ");
  if (audio.sample_rate() != bank.sample_rate)
    throw ConfigError("backward: audio sample rate does not match the bank");
  const std::size_t B = audio.batch();
  const std::size_t F = ceil_div(audio.length(), cfg.plan.hop);
  const std::size_t out_channels = cfg.compression == CompressionKind::kLmtbn ? 2 : 1;
  if (cotangent.batch() != B || cotangent.channels() != out_channels ||
      cotangent.bands() != N || cotangent.frames() != F)
    throw ShapeError("backward: cotangent shape does not match the frontend output");

  const int W = cfg.plan.window_max;
  const bool reference = cfg.filterbank == FilterbankKind::kLeaf;
  auto geometry = [&](std::size_t i) -> FilterGroup {
    if (reference) return {0, N, W, 1, W, cfg.plan.hop};
    return cfg.plan.group_of(i);
  };

  // Forward pass keeping the complex filter responses.
  std::vector<ComplexKernel<T>> kernels(N);
  std::vector<std::vector<T>> windows(N);
  std::vector<ComplexSequence<T>> responses(B * N);
  FeatureMap<double> energy(B, 1, N, F, cfg.plan.hop, bank.sample_rate);
  for (std::size_t i = 0; i < N; ++i) {
    const FilterGroup g = geometry(i);
    kernels[i] = gabor_kernel<T>(bank.center_freqs[i], bank.inv_bandwidths[i], g.kernel_size);
    windows[i] = gauss_kernel<T>(bank.pool_scales[i], g.pool_size, W, g.conv_stride);
    for (std::size_t b = 0; b < B; ++b) {
      auto& z = responses[b * N + i];
      z = convolve_complex<T>(audio.item(b), kernels[i], g.conv_stride);
      const auto pooled = gauss_pool<T>(squared_modulus(z), windows[i], g.pool_stride);
      std::ranges::copy(pooled, energy.row(b, 0, i).begin());
    }
  }
  require_finite(energy.values(), "filterbank");

  ParamGradients grads = ParamGradients::zeros(N);
  const FeatureMap<double> denergy =
      compression_backward(cfg, energy, params, cast_map<double>(cotangent), grads);
  require_finite(denergy.values(), "compression");

  for (std::size_t i = 0; i < N; ++i) {
    const FilterGroup g = geometry(i);
    const std::ptrdiff_t C = g.kernel_size, cpad = (C - 1) / 2;
    const std::ptrdiff_t P = g.pool_size, ppad = (P - 1) / 2;
    const std::ptrdiff_t L = g.conv_stride, K = g.pool_stride;
    std::vector<double> dk_re(C, 0.0), dk_im(C, 0.0), dwin(P, 0.0);

    for (std::size_t b = 0; b < B; ++b) {
      const auto& z = responses[b * N + i];
      const std::ptrdiff_t n_conv = static_cast<std::ptrdiff_t>(z.size());
      const auto dp = denergy.row(b, 0, i);
      // Pooling: d energy and d window.
      std::vector<double> de(n_conv, 0.0);
      for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(F); ++f) {
        const double gf = dp[f];
        if (gf == 0.0) continue;
        const std::ptrdiff_t base = f * K - ppad;
        const std::ptrdiff_t k0 = std::max<std::ptrdiff_t>(0, -base);
        const std::ptrdiff_t k1 = std::min<std::ptrdiff_t>(P, n_conv - base);
        for (std::ptrdiff_t k = k0; k < k1; ++k) {
          const double e = double(z.re[base + k]) * z.re[base + k] + double(z.im[base + k]) * z.im[base + k];
          de[base + k] += gf * windows[i][k];
          dwin[k] += gf * e;
        }
      }
      // Squared modulus.
      std::vector<double> dre(n_conv), dim(n_conv);
      for (std::ptrdiff_t j = 0; j < n_conv; ++j) {
        dre[j] = 2.0 * z.re[j] * de[j];
        dim[j] = 2.0 * z.im[j] * de[j];
      }
      // Convolution: d kernel taps.
      const auto x = audio.item(b);
      const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(x.size());
      for (std::ptrdiff_t k = 0; k < C; ++k) {
        // Outputs j with 0 <= j*L + k - cpad < len.
        const std::ptrdiff_t off = k - cpad;
        const std::ptrdiff_t j0 = off >= 0 ? 0 : (-off + L - 1) / L;
        const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(n_conv, (len - off + L - 1) / L);
        double acc_re = 0.0, acc_im = 0.0;
#pragma omp simd reduction(+ : acc_re, acc_im)
        for (std::ptrdiff_t j = j0; j < j1; ++j) {
          const double xv = x[j * L + off];
          acc_re += dre[j] * xv;
          acc_im += dim[j] * xv;
        }
        dk_re[k] += acc_re;
        dk_im[k] += acc_im;
      }
    }

    // Kernel taps -> (nu, sigma_c).
    const double sigma = bank.inv_bandwidths[i];
    double dnu = 0.0, dsigma = 0.0;
    for (std::ptrdiff_t k = 0; k < C; ++k) {
      const double t = double(k - cpad);
      const double env = std::exp(-t * t / (2.0 * sigma * sigma)) /
                         (std::sqrt(2.0 * std::numbers::pi) * sigma);
      const double re = env * std::cos(bank.center_freqs[i] * t);
      const double im = env * std::sin(bank.center_freqs[i] * t);
      dnu += t * (dk_im[k] * re - dk_re[k] * im);
      dsigma += (dk_re[k] * re + dk_im[k] * im) * (t * t / (sigma * sigma * sigma) - 1.0 / sigma);
    }
    // Window taps -> sigma_p.
    const double ps = pool_sigma(bank.pool_scales[i], W, g.conv_stride);
    const double dps_dscale = (W - 1) / 2.0 / double(g.conv_stride);
    const double pnorm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * ps);
    double dscale = 0.0;
    for (std::ptrdiff_t k = 0; k < P; ++k) {
      const double t = double(k - ppad);
      const double w = pnorm * std::exp(-t * t / (2.0 * ps * ps));
      dscale += dwin[k] * w * (t * t / (ps * ps * ps) - 1.0 / ps);
    }
    grads.center_freqs[i] = dnu;
    grads.inv_bandwidths[i] = dsigma;
    grads.pool_scales[i] = dscale * dps_dscale;
  }
  for (const auto* v : {&grads.center_freqs, &grads.inv_bandwidths, &grads.pool_scales})
    require_finite(*v, "filterbank");
  return grads;
}

template ParamGradients backward<float>(const PipelineConfig&, const AudioBatch<float>&,
                                        const FrontendParams&, const FeatureMap<float>&);
template ParamGradients backward<double>(const PipelineConfig&, const AudioBatch<double>&,
                                         const FrontendParams&, const FeatureMap<double>&);

// ---------------------------------------------------------------------------
// Finite-difference check.

namespace {

struct Slot {
  std::string name;
  std::vector<double>* value;
  const std::vector<double>* grad;
};

std::vector<Slot> slots_for(const PipelineConfig& cfg, FrontendParams& p, const ParamGradients& g) {
  std::vector<Slot> s = {
      {"filterbank.center_freqs", &p.filterbank.center_freqs, &g.center_freqs},
      {"filterbank.inv_bandwidths", &p.filterbank.inv_bandwidths, &g.inv_bandwidths},
      {"filterbank.pool_scales", &p.filterbank.pool_scales, &g.pool_scales},
  };
  if (cfg.compression == CompressionKind::kPcen) {
    s.push_back({"pcen.alpha", &p.pcen.alpha, &g.pcen_alpha});
    s.push_back({"pcen.delta", &p.pcen.delta, &g.pcen_delta});
    s.push_back({"pcen.root", &p.pcen.root, &g.pcen_root});
    s.push_back({"pcen.smooth", &p.pcen.smooth, &g.pcen_smooth});
  } else if (cfg.compression == CompressionKind::kLmtbn) {
    s.push_back({"lmtbn.log_gain", &p.lmtbn.log_gain, &g.log_gain});
    s.push_back({"lmtbn.gamma", &p.lmtbn.gamma, &g.gamma});
    s.push_back({"lmtbn.beta", &p.lmtbn.beta, &g.beta});
  }
  return s;
}

struct Evaluation {
  double loss = 0.0;
  std::vector<std::size_t> medians;  // active median positions, L-M-TBN only
};

Evaluation evaluate(const PipelineConfig& cfg, const AudioBatch<double>& audio,
                    FrontendParams params, const FeatureMap<double>& cot) {
  Evaluation ev;
  const FeatureMap<double> energy = frontend_energy(cfg, audio, params.filterbank);
  FeatureMap<double> out;
  switch (cfg.compression) {
    case CompressionKind::kNone: out = energy; break;
    case CompressionKind::kPcen: out = pcen(energy, params.pcen); break;
    case CompressionKind::kLmtbn: {
      const auto logged = log_compress(energy, params.lmtbn.log_gain);
      for (std::size_t b = 0; b < logged.batch(); ++b)
        for (std::size_t band = 0; band < logged.bands(); ++band) {
          const auto m = median_position(logged.row(b, 0, band));
          ev.medians.push_back(m.lo);
          ev.medians.push_back(m.hi);
        }
      out = lmtbn_forward(energy, params.lmtbn, cfg.mode);
      break;
    }
  }
  const auto o = out.values();
  const auto c = cot.values();
  for (std::size_t i = 0; i < o.size(); ++i) ev.loss += o[i] * c[i];
  return ev;
}

}  // namespace

std::vector<GradCheckEntry> GradCheckReport::failures() const {
  std::vector<GradCheckEntry> out;
  for (const auto& e : entries)
    if (!e.pass) out.push_back(e);
  return out;
}

GradCheckReport grad_check(const PipelineConfig& cfg, const AudioBatch<double>& audio,
                           const FrontendParams& params, const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  const std::size_t bands = params.bands();
  const std::size_t frames = ceil_div(audio.length(), cfg.plan.hop);
  const std::size_t channels = cfg.compression == CompressionKind::kLmtbn ? 2 : 1;
  FeatureMap<double> cot(audio.batch(), channels, bands, frames, cfg.plan.hop);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : cot.values()) v = normal(rng);

  ParamGradients analytic = backward(cfg, audio, params, cot);
  if (options.tamper) options.tamper(analytic);

  FrontendParams probe = params;
  const Evaluation base = evaluate(cfg, audio, probe, cot);

  GradCheckReport report;
  report.tolerance = options.tolerance;
  report.rel_step = options.rel_step;
  report.pass = true;
  for (const Slot& slot : slots_for(cfg, probe, analytic)) {
    std::vector<std::size_t> order(slot.value->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t want = options.samples_per_vector == 0
                                 ? order.size()
                                 : std::min(options.samples_per_vector, order.size());
    std::size_t taken = 0;
    for (std::size_t idx : order) {
      if (taken == want) break;
      double& x = (*slot.value)[idx];
      const double x0 = x;
      const double h = options.rel_step * std::max(std::abs(x0), 1e-2);
      bool moved = false;
      auto central = [&](double step) {
        x = x0 + step;
        const Evaluation plus = evaluate(cfg, audio, probe, cot);
        x = x0 - step;
        const Evaluation minus = evaluate(cfg, audio, probe, cot);
        x = x0;
        moved = moved || plus.medians != base.medians || minus.medians != base.medians;
        return (plus.loss - minus.loss) / (2.0 * step);
      };
      const double coarse = central(h);
      const double numeric =
          options.richardson ? (4.0 * central(0.5 * h) - coarse) / 3.0 : coarse;
      if (moved) {
        ++report.rejected;
        continue;
      }
      GradCheckEntry e;
      e.parameter = slot.name;
      e.index = idx;
      e.step = h;
      e.analytic = (*slot.grad)[idx];
      e.numeric = numeric;
      e.rel_error = std::abs(e.analytic - e.numeric) /
                    std::max({std::abs(e.analytic), std::abs(e.numeric), options.floor});
      e.pass = e.rel_error < options.tolerance;
      report.pass = report.pass && e.pass;
      report.entries.push_back(e);
      ++taken;
    }
  }
  return report;
}

FrontendParams project_constraints(FrontendParams p, const ConstraintBox& box) {
  auto clamp_all = [](std::vector<double>& v, double lo, double hi) {
    for (double& x : v) x = std::isnan(x) ? lo : std::clamp(x, lo, hi);
  };
  clamp_all(p.filterbank.center_freqs, box.min_center_freq, std::numbers::pi - box.min_center_freq);
  clamp_all(p.filterbank.inv_bandwidths, box.min_inv_bandwidth, box.max_inv_bandwidth);
  clamp_all(p.filterbank.pool_scales, box.min_pool_scale, 1.0 - box.min_pool_scale);
  clamp_all(p.pcen.alpha, box.min_exponent, 1.0);
  clamp_all(p.pcen.root, box.min_exponent, 1.0);
  clamp_all(p.pcen.smooth, box.min_smooth, 1.0 - box.min_smooth);
  clamp_all(p.pcen.delta, box.min_delta, std::numeric_limits<double>::max());
  return p;
}

}  // namespace efleaf
