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
#include <numeric>

#include "doctest.h"
#include "efleaf/errors.hpp"
#include "efleaf/frontend.hpp"

using namespace efleaf;

TEST_SUITE("frontend") {

TEST_CASE("mel scale fixed points and inverse") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(781.17283874803120).epsilon(1e-14));
  CHECK(mel_to_hz(hz_to_mel(4000.0)) == doctest::Approx(4000.0).epsilon(1e-13));
  CHECK_THROWS_AS(hz_to_mel(-1.0), DomainError);
  CHECK_THROWS_AS(mel_to_hz(-1.0), DomainError);
  double prev = -1.0;
  for (double f = 0; f <= 8000; f += 37.5) {
    const double m = hz_to_mel(f);
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("mel init matches the scripted oracle") {
  const auto bank = init_mel_gabor(40, 60.0, 7800.0, 16000.0);
  REQUIRE(bank.size() == 40);
  // Peaks 106.100762803 Hz and 7313.88647436 Hz.
  CHECK(bank.center_freqs[0] == doctest::Approx(0.0416656721204243).epsilon(1e-12));
  CHECK(bank.inv_bandwidths[0] == doctest::Approx(84.2123461046953).epsilon(1e-12));
  CHECK(bank.center_freqs[25] == doctest::Approx(1.10499507131753).epsilon(1e-12));
  CHECK(bank.inv_bandwidths[25] == doctest::Approx(19.3188944948428).epsilon(1e-12));
  CHECK(bank.center_freqs[39] == doctest::Approx(2.87215650212924).epsilon(1e-12));
  CHECK(bank.inv_bandwidths[39] == doctest::Approx(8.47075094583158).epsilon(1e-12));
  for (std::size_t i = 1; i < bank.size(); ++i) {
    CHECK(bank.center_freqs[i] > bank.center_freqs[i - 1]);
    CHECK(bank.inv_bandwidths[i] < bank.inv_bandwidths[i - 1]);
  }
  CHECK(*std::max_element(bank.inv_bandwidths.begin(), bank.inv_bandwidths.end()) ==
        bank.inv_bandwidths[0]);
  for (double sp : bank.pool_scales) CHECK(sp == 0.4);
  CHECK_NOTHROW(bank.validate());
}

TEST_CASE("single filter sits at the mel midpoint") {
  const auto bank = init_mel_gabor(1, 1000.0, 3000.0, 16000.0);
  REQUIRE(bank.size() == 1);
  const double mid = mel_to_hz(0.5 * (hz_to_mel(1000.0) + hz_to_mel(3000.0)));
  CHECK(bank.center_freqs[0] == doctest::Approx(2 * std::numbers::pi * mid / 16000.0));
  CHECK(bank.center_freqs[0] == doctest::Approx(0.709994929183949).epsilon(1e-12));
  CHECK(bank.inv_bandwidths[0] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("mel init rejects bad ranges") {
  CHECK_THROWS_AS(init_mel_gabor(40, 60.0, 9000.0, 16000.0), ConfigError);
  CHECK_THROWS_AS(init_mel_gabor(0, 60.0, 7800.0, 16000.0), ConfigError);
  CHECK_THROWS_AS(init_mel_gabor(4, 500.0, 400.0, 16000.0), ConfigError);
}

TEST_CASE("bank validation") {
  auto bank = init_mel_gabor(MelInitConfig{});
  auto bad = bank;
  bad.center_freqs[3] = std::numbers::pi;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = bank;
  bad.inv_bandwidths[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = bank;
  bad.pool_scales[5] = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = bank;
  bad.pool_scales.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("gabor kernel at zero frequency is a real Gaussian") {
  const auto k = gabor_kernel<double>(0.0, 10.0, 21);
  REQUIRE(k.size() == 21);
  for (int t = 0; t < 21; ++t) {
    CHECK(k.im[t] == 0.0);
    CHECK(k.re[t] > 0.0);
    CHECK(k.re[t] == k.re[20 - t]);
  }
  CHECK(k.re[10] == doctest::Approx(1.0 / (std::sqrt(2 * std::numbers::pi) * 10.0)));
}

TEST_CASE("gabor kernel matches high-precision evaluation") {
  const auto k = gabor_kernel<double>(std::numbers::pi / 2, 5.0, 41);
  REQUIRE(k.size() == 41);
  struct Tap { int t; double re, im; };
  const Tap taps[] = {{-20, 2.676604515297707e-5, 0.0},
                      {-3, 0.0, 0.066644920578359927},
                      {0, 0.079788456080286536, 0.0},
                      {1, 0.0, 0.078208538795091176},
                      {7, 0.0, -0.029945493127148971},
                      {20, 2.676604515297707e-5, 0.0}};
  for (const Tap& tap : taps) {
    CAPTURE(tap.t);
    CHECK(k.re[tap.t + 20] == doctest::Approx(tap.re).epsilon(1e-13).scale(0.08));
    CHECK(k.im[tap.t + 20] == doctest::Approx(tap.im).epsilon(1e-13).scale(0.08));
  }
}

TEST_CASE("gabor envelope is even") {
  for (double nu : {0.3, 1.7, 3.0}) {
    const auto k = gabor_kernel<double>(nu, 7.5, 33);
    for (int t = 0; t < 33; ++t) {
      const double a = std::hypot(k.re[t], k.im[t]);
      const double b = std::hypot(k.re[32 - t], k.im[32 - t]);
      CHECK(a == doctest::Approx(b).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(gabor_kernel<float>(0.5, 3.0, 10), ArgumentError);
}

TEST_CASE("gauss pooling window") {
  CHECK(pool_sigma(0.4, 401, 1) == doctest::Approx(80.0));
  CHECK(pool_sigma(0.4, 401, 40) == doctest::Approx(2.0));

  const auto wide = gauss_kernel<double>(0.4, 401, 401, 1);
  REQUIRE(wide.size() == 401);
  // Independent direct summation over +-2.5 sigma.
  CHECK(std::accumulate(wide.begin(), wide.end(), 0.0) == doctest::Approx(0.987799).epsilon(1e-6));

  const auto narrow = gauss_kernel<double>(0.4, 11, 401, 40);
  REQUIRE(narrow.size() == 11);
  for (int t = 0; t < 11; ++t) CHECK(narrow[t] == narrow[10 - t]);
  for (int t = 0; t < 5; ++t) CHECK(narrow[t] < narrow[t + 1]);

  const auto covered = gauss_kernel<double>(0.4, 25, 401, 40);  // +-6 sigma
  CHECK(std::accumulate(covered.begin(), covered.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));

  const auto f = gauss_kernel<float>(0.37, 101, 401, 4);
  for (int t = 0; t < 101; ++t) CHECK(f[t] == f[100 - t]);

  CHECK_THROWS_AS(gauss_kernel<double>(0.0, 11, 401, 40), ArgumentError);
  CHECK_THROWS_AS(gauss_kernel<double>(-0.1, 11, 401, 40), ArgumentError);
  CHECK_THROWS_AS(gauss_kernel<double>(0.4, 10, 401, 40), ArgumentError);
}

}  // TEST_SUITE
