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

#include <span>
#include <vector>

#include "efleaf/frontend.hpp"
#include "efleaf/plan.hpp"
#include "efleaf/tensor.hpp"

namespace efleaf {

template <typename T>
struct ComplexSequence {
  std::vector<T> re;
  std::vector<T> im;
  std::size_t size() const { return re.size(); }
};

// All stages are same-padded cross-correlations:
//   out[j] = sum_k in[j * stride + k - (K - 1) / 2] * kernel[k]
// with zeros outside the input, producing ceil(len / stride) outputs.

template <typename T>
ComplexSequence<T> convolve_complex(std::span<const T> signal, const ComplexKernel<T>& kernel,
                                    int stride);

template <typename T>
std::vector<T> squared_modulus(const ComplexSequence<T>& z);

template <typename T>
std::vector<T> gauss_pool(std::span<const T> energy, std::span<const T> window, int stride);

/// Reference filterbank: every filter at window_max taps and stride 1,
/// squared modulus, Gaussian pooling of window_max taps at stride hop.
/// Output is [batch x 1 x bands x ceil(time / hop)].
template <typename T>
FeatureMap<T> leaf_forward(const AudioBatch<T>& audio, const FilterbankParams& params,
                           int window_max = 401, int hop = 160);

/// Grouped filterbank following a frozen plan. Each group runs one
/// multi-output strided convolution fused with the squared modulus, then
/// per-filter pooling at the compensated rate. Same output shape and frame
/// rate as leaf_forward.
template <typename T>
FeatureMap<T> eleaf_forward(const AudioBatch<T>& audio, const FilterbankParams& params,
                            const GroupPlan& plan);

}  // namespace efleaf
