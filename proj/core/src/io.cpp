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

#include "efleaf/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "efleaf/errors.hpp"

namespace efleaf {
namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename U>
U load_le(std::string_view bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

template <typename U>
void store_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

[[noreturn]] void wav_error(const std::string& what, std::size_t offset) {
  throw FormatError("wav: " + what + " at byte offset " + std::to_string(offset));
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FormatError("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

AudioBatch<double> read_wav(const std::filesystem::path& path, double expected_rate) {
  const std::string bytes = read_all(path);
  const std::string_view b(bytes);
  if (b.size() < 12) wav_error("file shorter than RIFF header", b.size());
  if (b.substr(0, 4) != "RIFF") wav_error("missing RIFF tag", 0);
  if (b.substr(8, 4) != "WAVE") wav_error("missing WAVE tag", 8);

  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (pos + 8 <= b.size()) {
    const std::string_view id = b.substr(pos, 4);
    const std::uint32_t size = load_le<std::uint32_t>(b, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > b.size()) wav_error("truncated fmt chunk", pos);
      format = load_le<std::uint16_t>(b, body);
      channels = load_le<std::uint16_t>(b, body + 2);
      rate = load_le<std::uint32_t>(b, body + 4);
      bits = load_le<std::uint16_t>(b, body + 14);
      if (format == 0xFFFE) {
        if (size < 40) wav_error("truncated extensible fmt chunk", pos);
        format = load_le<std::uint16_t>(b, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) wav_error("data chunk before fmt chunk", pos);
      if (channels != 1)
        throw FormatError("wav: expected mono audio, found " + std::to_string(channels) +
                          " channels");
      if (double(rate) != expected_rate)
        throw FormatError("wav: sample rate mismatch, expected " +
                          std::to_string(static_cast<long long>(expected_rate)) + " Hz, found " +
                          std::to_string(rate) + " Hz (no resampling is done)");
      const std::size_t avail = std::min<std::size_t>(size, b.size() - body);
      std::vector<double> samples;
      if (format == 1 && bits == 16) {
        if (size > b.size() - body) wav_error("data chunk runs past end of file", pos);
        samples.resize(avail / 2);
        for (std::size_t i = 0; i < samples.size(); ++i)
          samples[i] = static_cast<std::int16_t>(load_le<std::uint16_t>(b, body + 2 * i)) / 32768.0;
      } else if (format == 3 && bits == 32) {
        if (size > b.size() - body) wav_error("data chunk runs past end of file", pos);
        samples.resize(avail / 4);
        for (std::size_t i = 0; i < samples.size(); ++i)
          samples[i] = std::bit_cast<float>(load_le<std::uint32_t>(b, body + 4 * i));
      } else {
        wav_error("unsupported encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits); need 16-bit PCM or 32-bit float",
                  pos - 8);
      }
      return AudioBatch<double>(std::move(samples), 1, double(rate));
    }
    pos = body + size + (size & 1);
  }
  wav_error(have_fmt ? "no data chunk" : "no fmt chunk", pos);
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               std::uint32_t sample_rate, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * (bits / 8));
  std::string out = "RIFF";
  store_le<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  store_le<std::uint32_t>(out, 16);
  store_le<std::uint16_t>(out, encoding == WavEncoding::kPcm16 ? 1 : 3);
  store_le<std::uint16_t>(out, 1);
  store_le<std::uint32_t>(out, sample_rate);
  store_le<std::uint32_t>(out, sample_rate * (bits / 8));
  store_le<std::uint16_t>(out, bits / 8);
  store_le<std::uint16_t>(out, bits);
  out += "data";
  store_le<std::uint32_t>(out, data_bytes);
  for (double v : samples) {
    if (encoding == WavEncoding::kPcm16) {
      const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      store_le<std::uint16_t>(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
    } else {
      store_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  write_file_atomic(path, out);
}

template <typename T>
std::string encode_features(const FeatureMap<T>& map, std::size_t batch_index) {
  if (batch_index >= map.batch()) throw ArgumentError("encode_features: batch index out of range");
  std::string out = "EFEA";
  store_le<std::uint16_t>(out, kFeatureFileVersion);
  store_le<std::uint16_t>(out, std::is_same_v<T, double> ? 1 : 0);
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.channels()));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.bands()));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.frames()));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.frame_hop()));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(std::llround(map.sample_rate())));
  using Bits = std::conditional_t<std::is_same_v<T, double>, std::uint64_t, std::uint32_t>;
  out.reserve(out.size() + map.channels() * map.bands() * map.frames() * sizeof(T));
  for (std::size_t c = 0; c < map.channels(); ++c)
    for (std::size_t band = 0; band < map.bands(); ++band)
      for (T v : map.row(batch_index, c, band)) store_le<Bits>(out, std::bit_cast<Bits>(v));
  return out;
}

template <typename T>
void write_features(const FeatureMap<T>& map, const std::filesystem::path& path,
                    std::size_t batch_index) {
  write_file_atomic(path, encode_features(map, batch_index));
}

namespace {

template <typename T>
FeatureMap<T> decode_payload(std::string_view b, std::size_t channels, std::size_t bands,
                             std::size_t frames, int hop, double rate) {
  using Bits = std::conditional_t<std::is_same_v<T, double>, std::uint64_t, std::uint32_t>;
  FeatureMap<T> map(1, channels, bands, frames, hop, rate);
  std::size_t off = kFeatureHeaderBytes;
  for (auto& v : map.values()) {
    v = std::bit_cast<T>(load_le<Bits>(b, off));
    off += sizeof(T);
  }
  return map;
}

}  // namespace

AnyFeatureMap decode_features(std::string_view b) {
  if (b.size() < kFeatureHeaderBytes)
    throw FormatError("feature file: header truncated (" + std::to_string(b.size()) + " of " +
                      std::to_string(kFeatureHeaderBytes) + " bytes)");
  if (b.substr(0, 4) != "EFEA") throw FormatError("feature file: bad magic, expected EFEA");
  const auto version = load_le<std::uint16_t>(b, 4);
  if (version != kFeatureFileVersion)
    throw FormatError("feature file: unsupported version " + std::to_string(version));
  const bool dbl = load_le<std::uint16_t>(b, 6) & 1;
  const std::size_t channels = load_le<std::uint32_t>(b, 8);
  const std::size_t bands = load_le<std::uint32_t>(b, 12);
  const std::size_t frames = load_le<std::uint32_t>(b, 16);
  const int hop = static_cast<int>(load_le<std::uint32_t>(b, 20));
  const double rate = load_le<std::uint32_t>(b, 24);
  const std::size_t expected = channels * bands * frames * (dbl ? 8 : 4);
  if (b.size() - kFeatureHeaderBytes != expected)
    throw FormatError("feature file: payload is " + std::to_string(b.size() - kFeatureHeaderBytes) +
                      " bytes, expected " + std::to_string(expected) + " bytes");
  if (dbl) return decode_payload<double>(b, channels, bands, frames, hop, rate);
  return decode_payload<float>(b, channels, bands, frames, hop, rate);
}

AnyFeatureMap read_features(const std::filesystem::path& path) {
  return decode_features(read_all(path));
}

template <typename T>
std::string encode_pgm(const FeatureMap<T>& map, std::size_t channel, std::size_t batch_index) {
  if (channel >= map.channels())
    throw ArgumentError("render_pgm: channel " + std::to_string(channel) + " out of range (" +
                        std::to_string(map.channels()) + " channels)");
  if (batch_index >= map.batch()) throw ArgumentError("render_pgm: batch index out of range");
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t band = 0; band < map.bands(); ++band)
    for (T v : map.row(batch_index, channel, band)) {
      lo = std::min(lo, double(v));
      hi = std::max(hi, double(v));
    }
  std::string out = "P5\n" + std::to_string(map.frames()) + " " + std::to_string(map.bands()) +
                    "\n255\n";
  const bool flat = !(hi > lo);
  for (std::size_t row = 0; row < map.bands(); ++row) {
    const std::size_t band = map.bands() - 1 - row;
    for (T v : map.row(batch_index, channel, band)) {
      const double px = flat ? 128.0 : std::round(255.0 * (double(v) - lo) / (hi - lo));
      out.push_back(static_cast<char>(static_cast<unsigned char>(px)));
    }
  }
  return out;
}

template <typename T>
void render_pgm(const FeatureMap<T>& map, std::size_t channel, const std::filesystem::path& path,
                std::size_t batch_index) {
  write_file_atomic(path, encode_pgm(map, channel, batch_index));
}

#define EFLEAF_INSTANTIATE(T)                                                                  \
  template std::string encode_features<T>(const FeatureMap<T>&, std::size_t);                  \
  template void write_features<T>(const FeatureMap<T>&, const std::filesystem::path&,          \
                                  std::size_t);                                                \
  template std::string encode_pgm<T>(const FeatureMap<T>&, std::size_t, std::size_t);          \
  template void render_pgm<T>(const FeatureMap<T>&, std::size_t, const std::filesystem::path&, \
                              std::size_t);
EFLEAF_INSTANTIATE(float)
EFLEAF_INSTANTIATE(double)
#undef EFLEAF_INSTANTIATE

}  // namespace efleaf
