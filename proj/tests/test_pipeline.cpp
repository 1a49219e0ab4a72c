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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "efleaf/errors.hpp"
#include "efleaf/harness.hpp"
#include "efleaf/pipeline.hpp"

using namespace efleaf;

namespace {

const FilterbankParams& default_bank() {
  static const auto bank = init_mel_gabor(MelInitConfig{});
  return bank;
}

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

double rel_rms(std::span<const double> a, std::span<const double> b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("impulse response is the reversed kernel") {
  const auto k = gabor_kernel<double>(0.7, 3.0, 15);
  std::vector<double> x(64, 0.0);
  x[30] = 1.0;
  const auto z = convolve_complex<double>(x, k, 1);
  REQUIRE(z.size() == 64);
  for (int j = 0; j < 64; ++j) {
    const int tap = 30 - j + 7;
    const double re = (tap >= 0 && tap < 15) ? k.re[tap] : 0.0;
    const double im = (tap >= 0 && tap < 15) ? k.im[tap] : 0.0;
    CHECK(z.re[j] == re);
    CHECK(z.im[j] == im);
  }
}

TEST_CASE("strided convolution equals subsampled dense convolution") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto x = random_signal(1003, seed);
    for (int taps : {1, 3, 69, 401}) {
      const auto k = gabor_kernel<double>(0.3 + 0.4 * seed, taps / 5.0 + 0.5, taps);
      const auto dense = convolve_complex<double>(x, k, 1);
      for (int stride : {1, 2, 7, 40, 160}) {
        const auto sparse = convolve_complex<double>(x, k, stride);
        REQUIRE(sparse.size() == (x.size() + stride - 1) / stride);
        for (std::size_t j = 0; j < sparse.size(); ++j) {
          CHECK(sparse.re[j] == doctest::Approx(dense.re[j * stride]).epsilon(1e-12).scale(1e-3));
          CHECK(sparse.im[j] == doctest::Approx(dense.im[j * stride]).epsilon(1e-12).scale(1e-3));
        }
      }
    }
  }
}

TEST_CASE("strided pooling equals subsampled dense pooling") {
  auto e = random_signal(2000, 9);
  for (auto& v : e) v = v * v;
  const auto w = gauss_kernel<double>(0.4, 101, 401, 4);
  const auto dense = gauss_pool<double>(e, w, 1);
  const auto sparse = gauss_pool<double>(e, w, 40);
  REQUIRE(sparse.size() == 50);
  for (std::size_t j = 0; j < sparse.size(); ++j)
    CHECK(sparse[j] == doctest::Approx(dense[j * 40]).epsilon(1e-12));
}

TEST_CASE("alternating kernel cancels a DC input") {
  const std::vector<double> ones(400, 1.0);
  const auto z = convolve_complex<double>(ones, gabor_kernel<double>(std::numbers::pi, 2.5, 41), 1);
  for (std::size_t j = 20; j < 380; ++j) CHECK(std::hypot(z.re[j], z.im[j]) < 1e-12);
}

TEST_CASE("squared modulus") {
  ComplexSequence<double> z{{3.0, 0.0, -1.5}, {4.0, 0.0, 2.0}};
  const auto e = squared_modulus(z);
  CHECK(e[0] == 25.0);
  CHECK(e[1] == 0.0);
  CHECK(e[2] == doctest::Approx(6.25));
  const double phi = 0.83;
  ComplexSequence<double> r{{}, {}};
  for (std::size_t i = 0; i < 3; ++i) {
    r.re.push_back(z.re[i] * std::cos(phi) - z.im[i] * std::sin(phi));
    r.im.push_back(z.re[i] * std::sin(phi) + z.im[i] * std::cos(phi));
  }
  const auto er = squared_modulus(r);
  for (std::size_t i = 0; i < 3; ++i) CHECK(er[i] == doctest::Approx(e[i]).epsilon(1e-14));
}

TEST_CASE("gauss pool basics") {
  const std::vector<double> c(2000, 2.5);
  const auto w = gauss_kernel<double>(0.4, 25, 401, 40);  // sums to 1
  const auto p = gauss_pool<double>(c, w, 4);
  for (std::size_t j = 4; j + 4 < p.size(); ++j) CHECK(p[j] == doctest::Approx(2.5).epsilon(1e-6));

  const auto x = random_signal(100, 3);
  const std::vector<double> one{1.0};
  const auto sub = gauss_pool<double>(x, one, 7);
  REQUIRE(sub.size() == 15);
  for (std::size_t j = 0; j < sub.size(); ++j) CHECK(sub[j] == x[j * 7]);

  auto e = random_signal(16000, 4);
  for (auto& v : e) v = v * v;
  const auto pooled = gauss_pool<double>(e, gauss_kernel<double>(0.4, 401, 401, 1), 160);
  CHECK(pooled.size() == 100);
  for (double v : pooled) CHECK(v >= 0.0);

  CHECK_THROWS_AS(gauss_pool<double>(e, one, 0), ArgumentError);
  CHECK_THROWS_AS(convolve_complex<double>(e, gabor_kernel<double>(1.0, 2.0, 5), 0), ArgumentError);
}

TEST_CASE("silence gives zeros") {
  AudioBatch<double> audio(2, 16000, 16000.0);
  const auto leaf = leaf_forward(audio, default_bank());
  CHECK(leaf.batch() == 2);
  CHECK(leaf.channels() == 1);
  CHECK(leaf.bands() == 40);
  CHECK(leaf.frames() == 100);
  for (double v : leaf.values()) CHECK(v == 0.0);
  const auto eleaf = eleaf_forward(audio, default_bank(), plan_groups(default_bank(), PlanConfig{}));
  for (double v : eleaf.values()) CHECK(v == 0.0);
}

TEST_CASE("a sine excites its own band most") {
  const auto& bank = default_bank();
  const std::vector<std::size_t> targets{0, 3, 11, 19, 25, 32, 39};
  AudioBatch<double> audio(targets.size(), 8000, 16000.0);
  for (std::size_t b = 0; b < targets.size(); ++b) {
    auto x = audio.item(b);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::sin(bank.center_freqs[targets[b]] * t);
  }
  const auto out = leaf_forward(audio, bank);
  for (std::size_t b = 0; b < targets.size(); ++b) {
    std::size_t best = 0;
    double best_energy = -1;
    for (std::size_t band = 0; band < 40; ++band) {
      double sum = 0;
      for (double v : out.row(b, 0, band)) sum += v;
      if (sum > best_energy) {
        best_energy = sum;
        best = band;
      }
    }
    CHECK(best == targets[b]);
  }
}

TEST_CASE("energy is quadratic in the input amplitude") {
  const auto x = random_signal(8000, 11);
  AudioBatch<double> a(x, 1, 16000.0);
  std::vector<double> scaled(x);
  for (auto& v : scaled) v *= 3.7;
  AudioBatch<double> b(scaled, 1, 16000.0);
  const auto plan = plan_groups(default_bank(), PlanConfig{});
  for (bool reference : {true, false}) {
    const auto ya = reference ? leaf_forward(a, default_bank()) : eleaf_forward(a, default_bank(), plan);
    const auto yb = reference ? leaf_forward(b, default_bank()) : eleaf_forward(b, default_bank(), plan);
    std::vector<double> expect(ya.values().begin(), ya.values().end());
    for (auto& v : expect) v *= 3.7 * 3.7;
    CHECK(rel_rms(expect, yb.values()) <= 1e-6);
    for (double v : ya.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("shifting the input by one hop shifts interior frames by one") {
  const auto x = random_signal(16000, 5);
  std::vector<double> shifted(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) shifted[(t + 160) % x.size()] = x[t];
  const AudioBatch<double> a(x, 1, 16000.0), b(shifted, 1, 16000.0);
  const auto plan = plan_groups(default_bank(), PlanConfig{});
  for (bool reference : {true, false}) {
    const auto ya = reference ? leaf_forward(a, default_bank()) : eleaf_forward(a, default_bank(), plan);
    const auto yb = reference ? leaf_forward(b, default_bank()) : eleaf_forward(b, default_bank(), plan);
    for (std::size_t band = 0; band < 40; ++band)
      for (std::size_t f = 3; f + 4 < 100; ++f)
        CHECK(yb(0, 0, band, f + 1) == doctest::Approx(ya(0, 0, band, f)).epsilon(1e-9));
  }
}

TEST_CASE("reference geometry plan reproduces the reference filterbank") {
  PlanConfig cfg;
  cfg.n_groups = 1;
  cfg.stride_rule = StrideRule::kFinest;
  const auto plan = plan_groups(default_bank(), cfg);
  const auto audio = white_noise<double>(2, 4000, 16000.0, 21);
  const auto a = leaf_forward(audio, default_bank());
  const auto b = eleaf_forward(audio, default_bank(), plan);
  CHECK(rel_rms(a.values(), b.values()) <= 1e-12);
}

TEST_CASE("frame count is ceil(time / hop) for every plan") {
  const auto audio = white_noise<float>(1, 16000, 16000.0, 1);
  const auto odd = white_noise<float>(1, 16001, 16000.0, 1);
  for (double b : {2.0, 4.75, 6.0})
    for (double d : {1.0, 16.0})
      for (int g : {1, 4, 8, 40}) {
        PlanConfig cfg;
        cfg.size_factor = b;
        cfg.stride_factor = d;
        cfg.n_groups = g;
        const auto plan = plan_groups(default_bank(), cfg);
        CHECK(eleaf_forward(audio, default_bank(), plan).frames() == 100);
        CHECK(eleaf_forward(odd, default_bank(), plan).frames() == 101);
      }
}

TEST_CASE("single precision tracks double precision") {
  const auto audio = white_noise<double>(1, 16000, 16000.0, 2);
  const auto plan = plan_groups(default_bank(), PlanConfig{});
  const auto d = eleaf_forward(audio, default_bank(), plan);
  const auto f = eleaf_forward(cast_audio<float>(audio), default_bank(), plan);
  const auto fd = cast_map<double>(f);
  CHECK(rel_rms(d.values(), fd.values()) <= 1e-5);
}

TEST_CASE("inconsistent inputs are rejected") {
  const auto audio = white_noise<double>(1, 1600, 16000.0, 2);
  const auto small = init_mel_gabor(20, 60.0, 7800.0, 16000.0);
  CHECK_THROWS_AS(eleaf_forward(audio, small, plan_groups(default_bank(), PlanConfig{})), ConfigError);
  const auto other_rate = white_noise<double>(1, 1600, 22050.0, 2);
  CHECK_THROWS_AS(leaf_forward(other_rate, default_bank()), ConfigError);
}

}  // TEST_SUITE
