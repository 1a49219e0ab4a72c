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

#include "efleaf/frontend.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "efleaf/errors.hpp"

namespace efleaf {

double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw DomainError("hz_to_mel: negative frequency " + std::to_string(hz));
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (!(mel >= 0.0)) throw DomainError("mel_to_hz: negative mel value " + std::to_string(mel));
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

void FilterbankParams::validate() const {
  const std::size_t n = center_freqs.size();
  if (n == 0) throw ConfigError("filterbank has no filters");
  if (inv_bandwidths.size() != n || pool_scales.size() != n)
    throw ConfigError("filterbank parameter vectors differ in length");
  if (!(sample_rate > 0.0)) throw ConfigError("filterbank sample rate must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(center_freqs[i] > 0.0 && center_freqs[i] < std::numbers::pi))
      throw ConfigError("center frequency " + std::to_string(i) + " outside (0, pi)");
    if (!(inv_bandwidths[i] > 0.0) || !std::isfinite(inv_bandwidths[i]))
      throw ConfigError("inverse bandwidth " + std::to_string(i) + " must be positive");
    if (!(pool_scales[i] > 0.0 && pool_scales[i] < 1.0))
      throw ConfigError("pool scale " + std::to_string(i) + " outside (0, 1)");
  }
}

FilterbankParams init_mel_gabor(std::size_t n_filters, double fmin, double fmax,
                                double sample_rate, double pool_scale) {
  if (n_filters == 0) throw ConfigError("init_mel_gabor: need at least one filter");
  if (!(fmin >= 0.0 && fmin < fmax))
    throw ConfigError("init_mel_gabor: need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0)
    throw ConfigError("init_mel_gabor: fmax " + std::to_string(fmax) +
                      " Hz exceeds Nyquist " + std::to_string(sample_rate / 2.0));

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  const double step = (mel_hi - mel_lo) / static_cast<double>(n_filters + 1);
  std::vector<double> peaks(n_filters + 2);
  for (std::size_t i = 0; i < peaks.size(); ++i)
    peaks[i] = mel_to_hz(mel_lo + step * static_cast<double>(i));
  peaks.front() = fmin;
  peaks.back() = fmax;

  FilterbankParams p;
  p.sample_rate = sample_rate;
  p.center_freqs.resize(n_filters);
  p.inv_bandwidths.resize(n_filters);
  p.pool_scales.assign(n_filters, pool_scale);
  for (std::size_t i = 0; i < n_filters; ++i) {
    p.center_freqs[i] = 2.0 * std::numbers::pi * peaks[i + 1] / sample_rate;
    p.inv_bandwidths[i] = (sample_rate / 2.0) / (peaks[i + 2] - peaks[i]);
  }
  return p;
}

template <typename T>
ComplexKernel<T> gabor_kernel(double center_freq, double inv_bandwidth, int size) {
  if (size < 1 || size % 2 == 0)
    throw ArgumentError("gabor_kernel: size must be odd and positive, got " +
                        std::to_string(size));
  if (!(inv_bandwidth > 0.0)) throw ArgumentError("gabor_kernel: sigma must be positive");
  const int half = (size - 1) / 2;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * inv_bandwidth);
  ComplexKernel<T> k;
  k.re.resize(size);
  k.im.resize(size);
  for (int i = 0; i < size; ++i) {
    const double t = i - half;
    const double env = norm * std::exp(-t * t / (2.0 * inv_bandwidth * inv_bandwidth));
    k.re[i] = static_cast<T>(env * std::cos(center_freq * t));
    k.im[i] = static_cast<T>(env * std::sin(center_freq * t));
  }
  return k;
}

double pool_sigma(double pool_scale, int ref_window, int conv_stride) {
  return pool_scale * (ref_window - 1) / 2.0 / conv_stride;
}

template <typename T>
std::vector<T> gauss_kernel(double pool_scale, int pool_size, int ref_window,
                            int conv_stride) {
  if (!(pool_scale > 0.0)) throw ArgumentError("gauss_kernel: pool scale must be positive");
  if (pool_size < 1 || pool_size % 2 == 0)
    throw ArgumentError("gauss_kernel: pool size must be odd and positive");
  if (conv_stride < 1) throw ArgumentError("gauss_kernel: conv stride must be >= 1");
  const double sigma = pool_sigma(pool_scale, ref_window, conv_stride);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  const int half = (pool_size - 1) / 2;
  std::vector<T> w(pool_size);
  // Fill from the center outwards so mirrored taps are the same bits.
  for (int t = 0; t <= half; ++t) {
    const T v = static_cast<T>(norm * std::exp(-double(t) * t / (2.0 * sigma * sigma)));
    w[half + t] = v;
    w[half - t] = v;
  }
  return w;
}

template ComplexKernel<float> gabor_kernel<float>(double, double, int);
template ComplexKernel<double> gabor_kernel<double>(double, double, int);
template std::vector<float> gauss_kernel<float>(double, int, int, int);
template std::vector<double> gauss_kernel<double>(double, int, int, int);

}  // namespace efleaf
