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
#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include "efleaf/tensor.hpp"

namespace efleaf {

// ---- WAV -------------------------------------------------------------------

/// Reads a mono RIFF/WAVE file (16-bit PCM or 32-bit float) as a batch of
/// one. PCM is scaled by 1/32768. No resampling: a rate other than
/// expected_rate, more than one channel, or a malformed header throws
/// FormatError (the latter naming the byte offset).
AudioBatch<double> read_wav(const std::filesystem::path& path, double expected_rate = 16000.0);

enum class WavEncoding { kPcm16, kFloat32 };

/// Mono WAV writer, mostly for fixtures. PCM16 clips to [-1, 1).
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               std::uint32_t sample_rate, WavEncoding encoding = WavEncoding::kPcm16);

// ---- Feature files ---------------------------------------------------------
//
// Little-endian layout:
//   0  "EFEA"
//   4  u16 version (1)
//   6  u16 flags (bit 0: float64 payload, else float32)
//   8  u32 n_channels, u32 n_bands, u32 n_frames, u32 frame_hop, u32 sample_rate
//   28 payload [channel][band][frame]

inline constexpr std::uint16_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 28;

using AnyFeatureMap = std::variant<FeatureMap<float>, FeatureMap<double>>;

/// Serializes batch item `batch_index` of the map. The write is atomic
/// (temporary file, then rename).
template <typename T>
void write_features(const FeatureMap<T>& map, const std::filesystem::path& path,
                    std::size_t batch_index = 0);

template <typename T>
std::string encode_features(const FeatureMap<T>& map, std::size_t batch_index = 0);

/// Returns a batch-of-one map in the precision stored in the file.
AnyFeatureMap read_features(const std::filesystem::path& path);
AnyFeatureMap decode_features(std::string_view bytes);

// ---- PGM -------------------------------------------------------------------

/// Binary P5 image, width = frames, height = bands, band 0 on the bottom
/// row, values min-max scaled to 0..255 (constant images map to 128).
template <typename T>
std::string encode_pgm(const FeatureMap<T>& map, std::size_t channel, std::size_t batch_index = 0);

template <typename T>
void render_pgm(const FeatureMap<T>& map, std::size_t channel, const std::filesystem::path& path,
                std::size_t batch_index = 0);

/// Writes bytes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace efleaf
