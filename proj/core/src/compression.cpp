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

#include "efleaf/compression.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "efleaf/errors.hpp"

namespace efleaf {

PcenParams PcenParams::defaults(std::size_t bands, double alpha, double delta, double root,
                                double smooth) {
  PcenParams p;
  p.alpha.assign(bands, alpha);
  p.delta.assign(bands, delta);
  p.root.assign(bands, root);
  p.smooth.assign(bands, smooth);
  return p;
}

void PcenParams::validate(std::size_t bands) const {
  if (alpha.size() != bands || delta.size() != bands || root.size() != bands ||
      smooth.size() != bands)
    throw ConfigError("PCEN parameters do not match " + std::to_string(bands) + " bands");
  for (std::size_t i = 0; i < bands; ++i) {
    if (!std::isfinite(alpha[i]) || !std::isfinite(delta[i]) || !std::isfinite(root[i]) ||
        !std::isfinite(smooth[i]))
      throw ConfigError("PCEN parameter of band " + std::to_string(i) + " is not finite");
    if (!(delta[i] > 0.0)) throw ConfigError("PCEN delta must be positive");
    if (!(smooth[i] > 0.0 && smooth[i] <= 1.0)) throw ConfigError("PCEN s must lie in (0, 1]");
  }
}

LmtbnParams LmtbnParams::defaults(std::size_t bands, double log_gain) {
  LmtbnParams p;
  p.log_gain.assign(bands, log_gain);
  p.gamma.assign(kChannels * bands, 1.0);
  p.beta.assign(kChannels * bands, 0.0);
  p.running.mean.assign(kChannels * bands, 0.0);
  p.running.var.assign(kChannels * bands, 1.0);
  return p;
}

void LmtbnParams::validate(std::size_t bands) const {
  const std::size_t n = kChannels * bands;
  if (log_gain.size() != bands || gamma.size() != n || beta.size() != n ||
      running.mean.size() != n || running.var.size() != n)
    throw ConfigError("L-M-TBN parameters do not match " + std::to_string(bands) + " bands");
  for (double v : running.var)
    if (!(v >= 0.0)) throw ConfigError("batch-norm running variance must be non-negative");
}

template <typename T>
FeatureMap<T> pcen(const FeatureMap<T>& x, const PcenParams& p) {
  p.validate(x.bands());
  FeatureMap<T> y = x;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t c = 0; c < x.channels(); ++c)
      for (std::size_t band = 0; band < x.bands(); ++band) {
        const auto in = x.row(b, c, band);
        auto out = y.row(b, c, band);
        const double alpha = p.alpha[band];
        const double delta = p.delta[band];
        const double r = p.root[band];
        const double s = p.smooth[band];
        const double offset = std::pow(delta, r);
        double m = 0.0;
        for (std::size_t t = 0; t < in.size(); ++t) {
          const double xt = in[t];
          if (!(xt >= 0.0))
            throw DomainError("pcen: negative or NaN energy in band " + std::to_string(band));
          m = (t == 0) ? xt : (1.0 - s) * m + s * xt;
          const double q = xt * std::pow(p.epsilon + m, -alpha);
          out[t] = static_cast<T>(std::pow(q + delta, r) - offset);
        }
      }
  return y;
}

template <typename T>
FeatureMap<T> log_compress(const FeatureMap<T>& x, std::span<const double> log_gain) {
  if (log_gain.size() != x.bands()) throw ShapeError("log_compress: one gain per band required");
  FeatureMap<T> y = x;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t c = 0; c < x.channels(); ++c)
      for (std::size_t band = 0; band < x.bands(); ++band) {
        const double gain = std::pow(10.0, log_gain[band]);
        for (auto& v : y.row(b, c, band)) v = static_cast<T>(std::log1p(gain * double(v)));
      }
  return y;
}

template <typename T>
MedianPosition median_position(std::span<const T> values) {
  if (values.empty()) throw ArgumentError("median of an empty sequence");
  // (value, index) pairs order ties by position.
  std::vector<std::pair<T, std::size_t>> items(values.size());
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = {values[i], i};
  const std::size_t mid = values.size() / 2;
  std::nth_element(items.begin(), items.begin() + mid, items.end());
  MedianPosition pos;
  pos.hi = items[mid].second;
  if (values.size() % 2 == 1) {
    pos.lo = pos.hi;
    pos.value = values[pos.hi];
  } else {
    pos.lo = std::max_element(items.begin(), items.begin() + mid)->second;
    pos.value = 0.5 * (double(values[pos.lo]) + double(values[pos.hi]));
  }
  return pos;
}

namespace {

// Median value only; `scratch` is reordered.
template <typename T>
double median_value(std::vector<T>& scratch) {
  const std::size_t mid = scratch.size() / 2;
  std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
  if (scratch.size() % 2 == 1) return scratch[mid];
  const T lower = *std::max_element(scratch.begin(), scratch.begin() + mid);
  return 0.5 * (double(lower) + double(scratch[mid]));
}

}  // namespace

template <typename T>
FeatureMap<T> median_subtract(const FeatureMap<T>& y) {
  FeatureMap<T> out = y;
  std::vector<T> scratch;
  for (std::size_t b = 0; b < y.batch(); ++b)
    for (std::size_t c = 0; c < y.channels(); ++c)
      for (std::size_t band = 0; band < y.bands(); ++band) {
        const auto row = y.row(b, c, band);
        if (row.empty()) throw ArgumentError("median of an empty sequence");
        scratch.assign(row.begin(), row.end());
        const T med = static_cast<T>(median_value(scratch));
        for (auto& v : out.row(b, c, band)) v -= med;
      }
  return out;
}

template <typename T>
FeatureMap<T> stack_channels(const FeatureMap<T>& original, const FeatureMap<T>& median_subtracted) {
  if (!original.same_shape(median_subtracted) || original.channels() != 1)
    throw ShapeError("stack_channels: expects two single-channel maps of equal shape");
  FeatureMap<T> out(original.batch(), 2, original.bands(), original.frames(),
                    original.frame_hop(), original.sample_rate());
  for (std::size_t b = 0; b < original.batch(); ++b)
    for (std::size_t band = 0; band < original.bands(); ++band) {
      std::ranges::copy(median_subtracted.row(b, 0, band), out.row(b, 0, band).begin());
      std::ranges::copy(original.row(b, 0, band), out.row(b, 1, band).begin());
    }
  return out;
}

namespace {

template <typename T>
void batch_norm_in_place(FeatureMap<T>& y, LmtbnParams& p, NormMode mode) {
  const FeatureMap<T>& x = y;
  const std::size_t groups = x.channels() * x.bands();
  if (p.gamma.size() != groups || p.beta.size() != groups)
    throw ShapeError("temporal_batch_norm: expected " + std::to_string(groups) +
                     " gamma/beta entries");
  if (mode == NormMode::kEval && !p.running.populated)
    throw StateError("temporal_batch_norm: eval mode before any train-mode update");
  if (p.running.mean.size() != groups) p.running.mean.assign(groups, 0.0);
  if (p.running.var.size() != groups) p.running.var.assign(groups, 1.0);

  const double count = double(x.batch() * x.frames());
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t band = 0; band < x.bands(); ++band) {
      const std::size_t g = c * x.bands() + band;
      double mean, var;
      if (mode == NormMode::kTrain) {
        double sum = 0.0;
        for (std::size_t b = 0; b < x.batch(); ++b)
          for (T v : x.row(b, c, band)) sum += v;
        mean = sum / count;
        double sq = 0.0;
        for (std::size_t b = 0; b < x.batch(); ++b)
          for (T v : x.row(b, c, band)) sq += (v - mean) * (v - mean);
        var = sq / count;
        const double unbiased = count > 1 ? sq / (count - 1) : var;
        const double m = p.bn_momentum;
        p.running.mean[g] = (1.0 - m) * p.running.mean[g] + m * mean;
        p.running.var[g] = (1.0 - m) * p.running.var[g] + m * unbiased;
      } else {
        mean = p.running.mean[g];
        var = p.running.var[g];
      }
      const double scale = p.gamma[g] / std::sqrt(var + p.bn_epsilon);
      for (std::size_t b = 0; b < x.batch(); ++b)
        for (auto& v : y.row(b, c, band)) v = static_cast<T>((v - mean) * scale + p.beta[g]);
    }
  if (mode == NormMode::kTrain) p.running.populated = true;
}

}  // namespace


template <typename T>
FeatureMap<T> temporal_batch_norm(const FeatureMap<T>& x, LmtbnParams& p, NormMode mode) {
  FeatureMap<T> y = x;
  batch_norm_in_place(y, p, mode);
  return y;
}

template <typename T>
FeatureMap<T> lmtbn_forward(const FeatureMap<T>& x, LmtbnParams& p, NormMode mode) {
  p.validate(x.bands());
  if (x.channels() != 1) throw ShapeError("lmtbn_forward: expects a single-channel map");
  FeatureMap<T> y(x.batch(), LmtbnParams::kChannels, x.bands(), x.frames(), x.frame_hop(),
                  x.sample_rate());
  std::vector<T> scratch;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t band = 0; band < x.bands(); ++band) {
      const double gain = std::pow(10.0, p.log_gain[band]);
      const auto in = x.row(b, 0, band);
      auto logged = y.row(b, 1, band);
      for (std::size_t f = 0; f < in.size(); ++f)
        logged[f] = static_cast<T>(std::log1p(gain * double(in[f])));
      scratch.assign(logged.begin(), logged.end());
      const T med = static_cast<T>(median_value(scratch));
      auto centered = y.row(b, 0, band);
      for (std::size_t f = 0; f < in.size(); ++f) centered[f] = logged[f] - med;
    }
  batch_norm_in_place(y, p, mode);
  return y;
}

#define EFLEAF_INSTANTIATE(T)                                                              \
  template FeatureMap<T> pcen<T>(const FeatureMap<T>&, const PcenParams&);                 \
  template FeatureMap<T> log_compress<T>(const FeatureMap<T>&, std::span<const double>);   \
  template MedianPosition median_position<T>(std::span<const T>);                          \
  template FeatureMap<T> median_subtract<T>(const FeatureMap<T>&);                         \
  template FeatureMap<T> stack_channels<T>(const FeatureMap<T>&, const FeatureMap<T>&);    \
  template FeatureMap<T> temporal_batch_norm<T>(const FeatureMap<T>&, LmtbnParams&,        \
                                                NormMode);                                 \
  template FeatureMap<T> lmtbn_forward<T>(const FeatureMap<T>&, LmtbnParams&, NormMode);
EFLEAF_INSTANTIATE(float)
EFLEAF_INSTANTIATE(double)
#undef EFLEAF_INSTANTIATE

}  // namespace efleaf
