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

#include "efleaf/stft_mel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "efleaf/errors.hpp"
#include "efleaf/frontend.hpp"

namespace efleaf {
namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct Fftw;

template <>
struct Fftw<double> {
  using Plan = fftw_plan;
  using Complex = fftw_complex;
  static Plan make(int n, double* in, Complex* out) {
    return fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void run(Plan p, double* in, Complex* out) { fftw_execute_dft_r2c(p, in, out); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
  static void* alloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void release(void* p) { fftw_free(p); }
};

template <>
struct Fftw<float> {
  using Plan = fftwf_plan;
  using Complex = fftwf_complex;
  static Plan make(int n, float* in, Complex* out) {
    return fftwf_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void run(Plan p, float* in, Complex* out) { fftwf_execute_dft_r2c(p, in, out); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
  static void* alloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void release(void* p) { fftwf_free(p); }
};

}  // namespace

template <typename T>
struct StftMel<T>::Impl {
  using F = Fftw<T>;
  typename F::Plan plan{};
  T* in = nullptr;
  typename F::Complex* out = nullptr;
  std::vector<T> window;
  // Sparse triangles: first bin and weights per band.
  std::vector<std::size_t> first_bin;
  std::vector<std::vector<T>> weights;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plan) F::destroy(plan);
    F::release(in);
    F::release(out);
  }
};

template <typename T>
StftMel<T>::StftMel(const StftMelConfig& cfg) : cfg_(cfg), impl_(std::make_unique<Impl>()) {
  if (cfg.window < 1 || cfg.window > cfg.fft_size || cfg.hop < 1)
    throw ConfigError("StftMel: need 1 <= window <= fft_size and hop >= 1");
  if (cfg.fmax > cfg.sample_rate / 2 || cfg.fmin < 0 || cfg.fmin >= cfg.fmax)
    throw ConfigError("StftMel: invalid mel range");
  using F = Fftw<T>;
  const int bins = cfg.fft_size / 2 + 1;
  impl_->in = static_cast<T*>(F::alloc(sizeof(T) * cfg.fft_size));
  impl_->out = static_cast<typename F::Complex*>(F::alloc(sizeof(typename F::Complex) * bins));
  {
    std::lock_guard lock(planner_mutex());
    impl_->plan = F::make(cfg.fft_size, impl_->in, impl_->out);
  }
  impl_->window.resize(cfg.window);
  for (int i = 0; i < cfg.window; ++i)
    impl_->window[i] = static_cast<T>(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.window));

  const double lo = hz_to_mel(cfg.fmin), hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(cfg.n_bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = lo + (hi - lo) * double(i) / double(cfg.n_bands + 1);
  for (std::size_t band = 0; band < cfg.n_bands; ++band) {
    std::size_t first = bins;
    std::vector<T> w;
    for (int k = 0; k < bins; ++k) {
      const double m = hz_to_mel(k * cfg.sample_rate / cfg.fft_size);
      const double up = (m - edges[band]) / (edges[band + 1] - edges[band]);
      const double down = (edges[band + 2] - m) / (edges[band + 2] - edges[band + 1]);
      const double v = std::max(0.0, std::min(up, down));
      if (v > 0.0) {
        if (first == std::size_t(bins)) first = k;
        w.resize(k - first + 1, T(0));
        w[k - first] = static_cast<T>(v);
      }
    }
    impl_->first_bin.push_back(first == std::size_t(bins) ? 0 : first);
    impl_->weights.push_back(std::move(w));
  }
}

template <typename T>
StftMel<T>::~StftMel() = default;
template <typename T>
StftMel<T>::StftMel(StftMel&&) noexcept = default;
template <typename T>
StftMel<T>& StftMel<T>::operator=(StftMel&&) noexcept = default;

template <typename T>
FeatureMap<T> StftMel<T>::forward(const AudioBatch<T>& audio) const {
  if (audio.sample_rate() != cfg_.sample_rate)
    throw ConfigError("StftMel: audio sample rate mismatch");
  const std::size_t frames = ceil_div(audio.length(), cfg_.hop);
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(audio.length());
  const std::ptrdiff_t half = (cfg_.window - 1) / 2;
  FeatureMap<T> out(audio.batch(), 1, cfg_.n_bands, frames, cfg_.hop, cfg_.sample_rate);
  const int bins = cfg_.fft_size / 2 + 1;
  std::vector<T> power(bins);
  for (std::size_t b = 0; b < audio.batch(); ++b) {
    const auto x = audio.item(b);
    for (std::size_t f = 0; f < frames; ++f) {
      std::fill(impl_->in, impl_->in + cfg_.fft_size, T(0));
      const std::ptrdiff_t start = std::ptrdiff_t(f) * cfg_.hop - half;
      for (std::ptrdiff_t i = 0; i < cfg_.window; ++i) {
        const std::ptrdiff_t s = start + i;
        if (s >= 0 && s < len) impl_->in[i] = x[s] * impl_->window[i];
      }
      Fftw<T>::run(impl_->plan, impl_->in, impl_->out);
      for (int k = 0; k < bins; ++k)
        power[k] = impl_->out[k][0] * impl_->out[k][0] + impl_->out[k][1] * impl_->out[k][1];
      for (std::size_t band = 0; band < cfg_.n_bands; ++band) {
        const auto& w = impl_->weights[band];
        const std::size_t k0 = impl_->first_bin[band];
        T acc = 0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * power[k0 + k];
        out(b, 0, band, f) = acc;
      }
    }
  }
  return out;
}

template class StftMel<float>;
template class StftMel<double>;

}  // namespace efleaf
