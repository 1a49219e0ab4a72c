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

#include "efleaf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "efleaf/errors.hpp"

namespace efleaf {
namespace {

// Valid tap range [k0, k1) for output j of a same-padded correlation.
inline void tap_range(std::ptrdiff_t j, int stride, std::ptrdiff_t pad, std::ptrdiff_t taps,
                      std::ptrdiff_t len, std::ptrdiff_t& k0, std::ptrdiff_t& k1) {
  const std::ptrdiff_t base = j * stride - pad;
  k0 = std::max<std::ptrdiff_t>(0, -base);
  k1 = std::min<std::ptrdiff_t>(taps, len - base);
}

template <typename T>
void check_sample_rate(const AudioBatch<T>& audio, const FilterbankParams& params) {
  if (audio.sample_rate() != params.sample_rate)
    throw ConfigError("audio sample rate " + std::to_string(audio.sample_rate()) +
                      " does not match filterbank rate " + std::to_string(params.sample_rate));
}

}  // namespace

template <typename T>
ComplexSequence<T> convolve_complex(std::span<const T> signal, const ComplexKernel<T>& kernel,
                                    int stride) {
  if (stride < 1) throw ArgumentError("convolve_complex: stride must be >= 1");
  const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(kernel.size());
  if (taps % 2 == 0) throw ArgumentError("convolve_complex: kernel length must be odd");
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(signal.size());
  const std::ptrdiff_t pad = (taps - 1) / 2;
  const std::ptrdiff_t n_out = static_cast<std::ptrdiff_t>(ceil_div(signal.size(), stride));
  ComplexSequence<T> out;
  out.re.assign(n_out, T(0));
  out.im.assign(n_out, T(0));
  const T* x = signal.data();
  const T* kr = kernel.re.data();
  const T* ki = kernel.im.data();
  if (stride == 1) {
    // Tap-major so the inner loop streams contiguous outputs.
    T* orr = out.re.data();
    T* oii = out.im.data();
    for (std::ptrdiff_t k = 0; k < taps; ++k) {
      const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, pad - k);
      const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(n_out, len + pad - k);
      const T cr = kr[k];
      const T ci = ki[k];
      const std::ptrdiff_t off = k - pad;
#pragma omp simd
      for (std::ptrdiff_t j = j0; j < j1; ++j) {
        orr[j] += x[j + off] * cr;
        oii[j] += x[j + off] * ci;
      }
    }
    return out;
  }
  for (std::ptrdiff_t j = 0; j < n_out; ++j) {
    std::ptrdiff_t k0, k1;
    tap_range(j, stride, pad, taps, len, k0, k1);
    const std::ptrdiff_t base = j * stride - pad;
    T acc_re = 0, acc_im = 0;
#pragma omp simd reduction(+ : acc_re, acc_im)
    for (std::ptrdiff_t k = k0; k < k1; ++k) {
      acc_re += x[base + k] * kr[k];
      acc_im += x[base + k] * ki[k];
    }
    out.re[j] = acc_re;
    out.im[j] = acc_im;
  }
  return out;
}

template <typename T>
std::vector<T> squared_modulus(const ComplexSequence<T>& z) {
  std::vector<T> e(z.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = z.re[i] * z.re[i] + z.im[i] * z.im[i];
  return e;
}

template <typename T>
std::vector<T> gauss_pool(std::span<const T> energy, std::span<const T> window, int stride) {
  if (stride < 1) throw ArgumentError("gauss_pool: stride must be >= 1");
  const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(window.size());
  if (taps % 2 == 0) throw ArgumentError("gauss_pool: window length must be odd");
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(energy.size());
  const std::ptrdiff_t pad = (taps - 1) / 2;
  const std::ptrdiff_t n_out = static_cast<std::ptrdiff_t>(ceil_div(energy.size(), stride));
  std::vector<T> out(n_out, T(0));
  for (std::ptrdiff_t j = 0; j < n_out; ++j) {
    std::ptrdiff_t k0, k1;
    tap_range(j, stride, pad, taps, len, k0, k1);
    const std::ptrdiff_t base = j * stride - pad;
    T acc = 0;
#pragma omp simd reduction(+ : acc)
    for (std::ptrdiff_t k = k0; k < k1; ++k) acc += energy[base + k] * window[k];
    out[j] = acc;
  }
  return out;
}

template <typename T>
FeatureMap<T> leaf_forward(const AudioBatch<T>& audio, const FilterbankParams& params,
                           int window_max, int hop) {
  params.validate();
  check_sample_rate(audio, params);
  if (window_max < 1 || window_max % 2 == 0) throw ConfigError("leaf_forward: window must be odd");
  if (hop < 1) throw ConfigError("leaf_forward: hop must be >= 1");
  const std::size_t n = params.size();
  std::vector<ComplexKernel<T>> kernels;
  std::vector<std::vector<T>> windows;
  for (std::size_t i = 0; i < n; ++i) {
    kernels.push_back(gabor_kernel<T>(params.center_freqs[i], params.inv_bandwidths[i], window_max));
    windows.push_back(gauss_kernel<T>(params.pool_scales[i], window_max, window_max, 1));
  }
  FeatureMap<T> out(audio.batch(), 1, n, ceil_div(audio.length(), hop), hop, params.sample_rate);
  for (std::size_t b = 0; b < audio.batch(); ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto energy = squared_modulus(convolve_complex<T>(audio.item(b), kernels[i], 1));
      const auto pooled = gauss_pool<T>(energy, windows[i], hop);
      std::copy(pooled.begin(), pooled.end(), out.row(b, 0, i).begin());
    }
  }
  return out;
}

template <typename T>
FeatureMap<T> eleaf_forward(const AudioBatch<T>& audio, const FilterbankParams& params,
                            const GroupPlan& plan) {
  params.validate();
  plan.validate();
  check_sample_rate(audio, params);
  const std::size_t n = params.size();
  if (plan.n_filters() != n)
    throw ConfigError("eleaf_forward: plan covers " + std::to_string(plan.n_filters()) +
                      " filters, bank has " + std::to_string(n));

  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(audio.length());
  FeatureMap<T> out(audio.batch(), 1, n, ceil_div(audio.length(), plan.hop), plan.hop,
                    params.sample_rate);

  for (const FilterGroup& grp : plan.groups) {
    const std::ptrdiff_t width = static_cast<std::ptrdiff_t>(grp.width());
    const std::ptrdiff_t lanes = 2 * width;
    const std::ptrdiff_t taps = grp.kernel_size;
    const std::ptrdiff_t pad = (taps - 1) / 2;
    const int stride = grp.conv_stride;

    // Tap-major kernel matrix: row k holds [re_0..re_{w-1}, im_0..im_{w-1}].
    std::vector<T> bank(taps * lanes);
    std::vector<std::vector<T>> windows;
    for (std::ptrdiff_t f = 0; f < width; ++f) {
      const std::size_t i = grp.lo + f;
      const auto k = gabor_kernel<T>(params.center_freqs[i], params.inv_bandwidths[i], grp.kernel_size);
      for (std::ptrdiff_t t = 0; t < taps; ++t) {
        bank[t * lanes + f] = k.re[t];
        bank[t * lanes + width + f] = k.im[t];
      }
      windows.push_back(gauss_kernel<T>(params.pool_scales[i], grp.pool_size, plan.window_max, stride));
    }

    const std::ptrdiff_t n_conv = static_cast<std::ptrdiff_t>(ceil_div(audio.length(), stride));
    std::vector<T> energy(width * n_conv);
    std::vector<T> acc(lanes);
    for (std::size_t b = 0; b < audio.batch(); ++b) {
      const T* x = audio.item(b).data();
      for (std::ptrdiff_t j = 0; j < n_conv; ++j) {
        std::ptrdiff_t k0, k1;
        tap_range(j, stride, pad, taps, len, k0, k1);
        std::fill(acc.begin(), acc.end(), T(0));
        const std::ptrdiff_t base = j * stride - pad;
        for (std::ptrdiff_t k = k0; k < k1; ++k) {
          const T xv = x[base + k];
          const T* row = bank.data() + k * lanes;
          T* a = acc.data();
#pragma omp simd
          for (std::ptrdiff_t l = 0; l < lanes; ++l) a[l] += xv * row[l];
        }
        for (std::ptrdiff_t f = 0; f < width; ++f)
          energy[f * n_conv + j] = acc[f] * acc[f] + acc[width + f] * acc[width + f];
      }
      for (std::ptrdiff_t f = 0; f < width; ++f) {
        const auto pooled = gauss_pool<T>(std::span<const T>(energy.data() + f * n_conv, n_conv),
                                          windows[f], grp.pool_stride);
        std::copy(pooled.begin(), pooled.end(), out.row(b, 0, grp.lo + f).begin());
      }
    }
  }
  return out;
}

#define EFLEAF_INSTANTIATE(T)                                                                   \
  template ComplexSequence<T> convolve_complex<T>(std::span<const T>, const ComplexKernel<T>&, \
                                                  int);                                        \
  template std::vector<T> squared_modulus<T>(const ComplexSequence<T>&);                       \
  template std::vector<T> gauss_pool<T>(std::span<const T>, std::span<const T>, int);          \
  template FeatureMap<T> leaf_forward<T>(const AudioBatch<T>&, const FilterbankParams&, int,   \
                                         int);                                                 \
  template FeatureMap<T> eleaf_forward<T>(const AudioBatch<T>&, const FilterbankParams&,       \
                                          const GroupPlan&);
EFLEAF_INSTANTIATE(float)
EFLEAF_INSTANTIATE(double)
#undef EFLEAF_INSTANTIATE

}  // namespace efleaf
