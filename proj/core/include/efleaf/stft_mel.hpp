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

#include <cstdint>
#include <memory>

#include "efleaf/tensor.hpp"

namespace efleaf {

/// Fixed power-STFT mel filterbank used as the non-learnable baseline:
/// Hann window of `window` samples zero-padded to `fft_size`, centered
/// frames every `hop` samples, HTK triangles between fmin and fmax.
struct StftMelConfig {
  int window = 401;
  int hop = 160;
  int fft_size = 512;
  std::size_t n_bands = 40;
  double fmin = 60.0;
  double fmax = 7800.0;
  double sample_rate = 16000.0;
};

template <typename T>
class StftMel {
 public:
  explicit StftMel(const StftMelConfig& cfg = {});
  ~StftMel();
  StftMel(StftMel&&) noexcept;
  StftMel& operator=(StftMel&&) noexcept;

  /// [batch x 1 x n_bands x ceil(time / hop)] mel power.
  FeatureMap<T> forward(const AudioBatch<T>& audio) const;
  const StftMelConfig& config() const { return cfg_; }

 private:
  struct Impl;
  StftMelConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace efleaf
