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

namespace efleaf {

// HTK mel scale, m = 2595 * log10(1 + f / 700). Both throw DomainError on
// negative input.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Learnable Gabor filterbank parameters.
///
/// center_freqs are angular frequencies in radians per sample (pi is
/// Nyquist). inv_bandwidths are the standard deviations of the Gaussian
/// envelopes in samples. pool_scales are the Gaussian pooling widths as a
/// fraction of half the reference pooling window.
struct FilterbankParams {
  std::vector<double> center_freqs;
  std::vector<double> inv_bandwidths;
  std::vector<double> pool_scales;
  double sample_rate = 16000.0;

  std::size_t size() const { return center_freqs.size(); }
  /// Throws ConfigError unless every invariant of the bank holds.
  void validate() const;
};

struct MelInitConfig {
  std::size_t n_filters = 40;
  double fmin = 60.0;
  double fmax = 7800.0;
  double sample_rate = 16000.0;
  double pool_scale = 0.4;
};

/// Mel-spaced Gabor bank.
///
/// n_filters + 2 peaks are spaced evenly on the mel scale between fmin (lower
/// edge of the first triangle) and fmax (upper edge of the last). Filter i is
/// centered on peak i + 1; its envelope width is chosen so the half-maximum
/// width of the square-rooted mel triangle matches the Gabor response, which
/// in closed form gives sigma_i = (sample_rate / 2) / (f_{i+2} - f_i).
FilterbankParams init_mel_gabor(std::size_t n_filters, double fmin, double fmax,
                                double sample_rate, double pool_scale = 0.4);
inline FilterbankParams init_mel_gabor(const MelInitConfig& cfg) {
  return init_mel_gabor(cfg.n_filters, cfg.fmin, cfg.fmax, cfg.sample_rate,
                        cfg.pool_scale);
}

/// Complex kernel stored as separate real and imaginary taps.
template <typename T>
struct ComplexKernel {
  std::vector<T> re;
  std::vector<T> im;
  std::size_t size() const { return re.size(); }
};

/// c_t = exp(i nu t) / (sqrt(2 pi) sigma) * exp(-t^2 / (2 sigma^2)) for
/// t = -(size-1)/2 .. (size-1)/2. Throws ArgumentError for even size.
template <typename T>
ComplexKernel<T> gabor_kernel(double center_freq, double inv_bandwidth, int size);

/// Normalized Gaussian pooling window at the rate of a conv_stride-strided
/// sequence. Its std in those output samples is
/// pool_scale * (ref_window - 1) / 2 / conv_stride.
template <typename T>
std::vector<T> gauss_kernel(double pool_scale, int pool_size, int ref_window,
                            int conv_stride);

/// Std of the Gaussian pooling window in conv-output samples.
double pool_sigma(double pool_scale, int ref_window, int conv_stride);

}  // namespace efleaf
