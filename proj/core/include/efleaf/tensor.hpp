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
#include <span>
#include <vector>

#include "efleaf/errors.hpp"

namespace efleaf {

/// A batch of equal-length mono signals, stored item-major.
template <typename T>
class AudioBatch {
 public:
  AudioBatch() = default;
  AudioBatch(std::size_t batch, std::size_t length, double sample_rate)
      : batch_(batch), length_(length), sample_rate_(sample_rate),
        samples_(batch * length, T(0)) {}
  AudioBatch(std::vector<T> samples, std::size_t batch, double sample_rate)
      : batch_(batch), sample_rate_(sample_rate), samples_(std::move(samples)) {
    if (batch == 0 || samples_.size() % batch != 0)
      throw ShapeError("audio sample count is not a multiple of the batch size");
    length_ = samples_.size() / batch;
  }

  std::size_t batch() const { return batch_; }
  std::size_t length() const { return length_; }
  double sample_rate() const { return sample_rate_; }

  std::span<T> item(std::size_t b) { return {samples_.data() + b * length_, length_}; }
  std::span<const T> item(std::size_t b) const {
    return {samples_.data() + b * length_, length_};
  }
  std::span<T> samples() { return samples_; }
  std::span<const T> samples() const { return samples_; }

 private:
  std::size_t batch_ = 0;
  std::size_t length_ = 0;
  double sample_rate_ = 0.0;
  std::vector<T> samples_;
};

/// Real tensor [batch x channels x bands x frames], frame axis contiguous.
template <typename T>
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t batch, std::size_t channels, std::size_t bands,
             std::size_t frames, int frame_hop = 0, double sample_rate = 0.0)
      : batch_(batch), channels_(channels), bands_(bands), frames_(frames),
        frame_hop_(frame_hop), sample_rate_(sample_rate),
        values_(batch * channels * bands * frames, T(0)) {}

  std::size_t batch() const { return batch_; }
  std::size_t channels() const { return channels_; }
  std::size_t bands() const { return bands_; }
  std::size_t frames() const { return frames_; }
  std::size_t size() const { return values_.size(); }
  int frame_hop() const { return frame_hop_; }
  double sample_rate() const { return sample_rate_; }
  void set_frame_hop(int hop) { frame_hop_ = hop; }
  void set_sample_rate(double sr) { sample_rate_ = sr; }

  T& operator()(std::size_t b, std::size_t c, std::size_t band, std::size_t f) {
    return values_[offset(b, c, band) + f];
  }
  const T& operator()(std::size_t b, std::size_t c, std::size_t band,
                      std::size_t f) const {
    return values_[offset(b, c, band) + f];
  }

  std::span<T> row(std::size_t b, std::size_t c, std::size_t band) {
    return {values_.data() + offset(b, c, band), frames_};
  }
  std::span<const T> row(std::size_t b, std::size_t c, std::size_t band) const {
    return {values_.data() + offset(b, c, band), frames_};
  }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool same_shape(const FeatureMap& other) const {
    return batch_ == other.batch_ && channels_ == other.channels_ &&
           bands_ == other.bands_ && frames_ == other.frames_;
  }

 private:
  std::size_t offset(std::size_t b, std::size_t c, std::size_t band) const {
    return ((b * channels_ + c) * bands_ + band) * frames_;
  }

  std::size_t batch_ = 0;
  std::size_t channels_ = 0;
  std::size_t bands_ = 0;
  std::size_t frames_ = 0;
  int frame_hop_ = 0;
  double sample_rate_ = 0.0;
  std::vector<T> values_;
};

template <typename To, typename From>
FeatureMap<To> cast_map(const FeatureMap<From>& in) {
  FeatureMap<To> out(in.batch(), in.channels(), in.bands(), in.frames(),
                     in.frame_hop(), in.sample_rate());
  auto src = in.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<To>(src[i]);
  return out;
}

template <typename To, typename From>
AudioBatch<To> cast_audio(const AudioBatch<From>& in) {
  std::vector<To> samples(in.samples().begin(), in.samples().end());
  return AudioBatch<To>(std::move(samples), in.batch(), in.sample_rate());
}

// Frames produced by a same-padded strided stage.
constexpr std::size_t ceil_div(std::size_t n, std::size_t d) { return (n + d - 1) / d; }

}  // namespace efleaf
