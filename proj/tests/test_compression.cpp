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
#include <random>

#include "doctest.h"
#include "efleaf/compression.hpp"
#include "efleaf/errors.hpp"

using namespace efleaf;

namespace {

FeatureMap<double> random_energy(std::size_t batch, std::size_t bands, std::size_t frames,
                                 std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> dist(1.0);
  FeatureMap<double> x(batch, 1, bands, frames, 160, 16000.0);
  for (auto& v : x.values()) v = scale * dist(rng);
  return x;
}

double median_of(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

TEST_SUITE("compression") {

TEST_CASE("pcen with alpha 0 and r 1 is the identity") {
  const auto x = random_energy(2, 5, 50, 1);
  for (double s : {0.04, 0.5, 1.0}) {
    auto p = PcenParams::defaults(5, 0.0, 2.0, 1.0, s);
    const auto y = pcen(x, p);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(y.values()[i] == doctest::Approx(x.values()[i]).epsilon(1e-14).scale(2.0));
  }
}

TEST_CASE("pcen with s 1 uses the current frame only") {
  const auto x = random_energy(1, 3, 40, 2);
  const auto p = PcenParams::defaults(3, 0.96, 2.0, 0.5, 1.0);
  const auto y = pcen(x, p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xt = x.values()[i];
    const double expect = std::pow(xt / std::pow(1e-12 + xt, 0.96) + 2.0, 0.5) - std::sqrt(2.0);
    CHECK(y.values()[i] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("pcen constant input is a fixed point") {
  FeatureMap<double> x(1, 1, 2, 300);
  for (auto& v : x.values()) v = 3.7;
  const auto y = pcen(x, PcenParams::defaults(2));
  // (c / (eps + c)^0.96 + 2)^0.5 - sqrt(2), high-precision evaluation.
  for (double v : y.values()) CHECK(std::abs(v - 0.33327804122238507) <= 1e-12 * 0.3333);
}

TEST_CASE("pcen smoother stays inside the input range") {
  const auto x = random_energy(2, 4, 200, 3);
  // With alpha = r = 1 and tiny delta, y = x / (eps + m) so m can be read back.
  const auto p = PcenParams::defaults(4, 1.0, 1e-300, 1.0, 0.04);
  const auto y = pcen(x, p);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t band = 0; band < 4; ++band) {
      const auto xs = x.row(b, 0, band);
      const auto ys = y.row(b, 0, band);
      const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
      for (std::size_t t = 0; t < xs.size(); ++t) {
        const double m = xs[t] / ys[t] - 1e-12;
        CHECK(m >= *lo * (1 - 1e-12));
        CHECK(m <= *hi * (1 + 1e-12));
      }
    }
}

TEST_CASE("pcen rejects negative energy and bad parameters") {
  auto x = random_energy(1, 2, 10, 4);
  x(0, 0, 1, 5) = -1e-3;
  CHECK_THROWS_AS(pcen(x, PcenParams::defaults(2)), DomainError);
  CHECK_THROWS_AS(pcen(random_energy(1, 3, 10, 4), PcenParams::defaults(2)), ConfigError);
  auto p = PcenParams::defaults(2);
  p.delta[0] = 0.0;
  CHECK_THROWS_AS(pcen(random_energy(1, 2, 10, 4), p), ConfigError);
}

TEST_CASE("log compression") {
  FeatureMap<double> x(1, 1, 3, 4);
  const std::vector<double> gains{5.0, 0.0, -2.0};
  CHECK(log_compress(x, gains).values()[0] == 0.0);
  x(0, 0, 0, 0) = 1.0;
  CHECK(log_compress(x, gains)(0, 0, 0, 0) == doctest::Approx(11.512935464920229).epsilon(1e-15));
  for (double u : {1e-6, 1e-3, 0.0199}) {
    x(0, 0, 1, 1) = u;
    const double y = log_compress(x, gains)(0, 0, 1, 1);
    CHECK(std::abs(y - u) / u < 0.01);
  }
  CHECK_THROWS_AS(log_compress(x, std::vector<double>{1.0}), ShapeError);

  FeatureMap<double> ramp(1, 1, 1, 50);
  for (std::size_t f = 0; f < 50; ++f) ramp(0, 0, 0, f) = 0.01 * f;
  double prev_gain_out = -1;
  for (double a : {-1.0, 0.0, 1.0, 3.0}) {
    const auto y = log_compress(ramp, std::vector<double>{a});
    for (std::size_t f = 1; f < 50; ++f) CHECK(y(0, 0, 0, f) > y(0, 0, 0, f - 1));
    CHECK(y(0, 0, 0, 10) > prev_gain_out);
    prev_gain_out = y(0, 0, 0, 10);
  }
}

TEST_CASE("median subtraction") {
  FeatureMap<double> y(1, 1, 2, 3);
  y(0, 0, 0, 0) = 1;
  y(0, 0, 0, 1) = 2;
  y(0, 0, 0, 2) = 100;
  for (std::size_t f = 0; f < 3; ++f) y(0, 0, 1, f) = 4.25;
  const auto m = median_subtract(y);
  CHECK(m(0, 0, 0, 0) == -1);
  CHECK(m(0, 0, 0, 1) == 0);
  CHECK(m(0, 0, 0, 2) == 98);
  for (std::size_t f = 0; f < 3; ++f) CHECK(m(0, 0, 1, f) == 0.0);

  const auto r = random_energy(3, 7, 101, 5);
  const auto once = median_subtract(r);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t band = 0; band < 7; ++band) CHECK(median_of(once.row(b, 0, band)) == 0.0);
  const auto twice = median_subtract(once);
  CHECK(std::equal(once.values().begin(), once.values().end(), twice.values().begin()));

  FeatureMap<double> even(1, 1, 1, 4);
  const double vals[] = {7, 1, 3, 5};
  for (std::size_t f = 0; f < 4; ++f) even(0, 0, 0, f) = vals[f];
  const auto e = median_subtract(even);
  CHECK(e(0, 0, 0, 0) == 3.0);
  CHECK(e(0, 0, 0, 1) == -3.0);
}

TEST_CASE("median position") {
  const std::vector<double> odd{5, 1, 9, 3, 7};
  const auto p = median_position<double>(odd);
  CHECK(p.lo == 0);
  CHECK(p.hi == 0);
  CHECK(p.value == 5);
  const std::vector<double> even{4, 8, 1, 6};
  const auto q = median_position<double>(even);
  CHECK(q.lo == 0);
  CHECK(q.hi == 3);
  CHECK(q.value == 5);
  const std::vector<double> ties{2, 2, 2};
  CHECK(median_position<double>(ties).lo == 1);
  CHECK_THROWS_AS(median_position<double>(std::vector<double>{}), ArgumentError);
}

TEST_CASE("channel stacking") {
  const auto logged = log_compress(random_energy(2, 4, 30, 6), std::vector<double>(4, 5.0));
  const auto centered = median_subtract(logged);
  const auto s = stack_channels(logged, centered);
  CHECK(s.channels() == 2);
  CHECK(s.bands() == 4);
  CHECK(s.frames() == 30);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t band = 0; band < 4; ++band) {
      const auto ch0 = s.row(b, 0, band);
      const auto ch1 = s.row(b, 1, band);
      CHECK(std::equal(ch1.begin(), ch1.end(), logged.row(b, 0, band).begin()));
      const double med = median_of(ch1);
      for (std::size_t f = 0; f < 30; ++f) CHECK(ch0[f] + med == doctest::Approx(ch1[f]).epsilon(1e-15));
    }
  CHECK_THROWS_AS(stack_channels(logged, random_energy(2, 4, 31, 6)), ShapeError);
}

TEST_CASE("temporal batch norm in train mode") {
  auto p = LmtbnParams::defaults(3);
  FeatureMap<double> x(4, 2, 3, 50);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(2.0, 3.0);
  for (auto& v : x.values()) v = normal(rng);
  const auto y = temporal_batch_norm(x, p, NormMode::kTrain);
  CHECK(p.running.populated);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t band = 0; band < 3; ++band) {
      double sum = 0, sq = 0, xsum = 0, xsq = 0;
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t f = 0; f < 50; ++f) {
          sum += y(b, c, band, f);
          xsum += x(b, c, band, f);
        }
      const double mean = sum / 200, xmean = xsum / 200;
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t f = 0; f < 50; ++f) {
          sq += (y(b, c, band, f) - mean) * (y(b, c, band, f) - mean);
          xsq += (x(b, c, band, f) - xmean) * (x(b, c, band, f) - xmean);
        }
      CHECK(std::abs(mean) <= 1e-5);
      CHECK(std::abs(sq / 200 - 1.0) <= 1e-5);
      const std::size_t g = c * 3 + band;
      CHECK(p.running.mean[g] == doctest::Approx(0.1 * xmean).epsilon(1e-12));
      CHECK(p.running.var[g] == doctest::Approx(0.9 + 0.1 * xsq / 199).epsilon(1e-12));
    }
}

TEST_CASE("temporal batch norm edge cases") {
  auto p = LmtbnParams::defaults(2);
  FeatureMap<double> x(2, 2, 2, 10);
  for (auto& v : x.values()) v = 6.5;
  CHECK_THROWS_AS(temporal_batch_norm(x, p, NormMode::kEval), StateError);
  const auto flat = temporal_batch_norm(x, p, NormMode::kTrain);
  for (double v : flat.values()) CHECK(v == 0.0);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (auto& v : x.values()) v = normal(rng);
  auto zero_gamma = LmtbnParams::defaults(2);
  std::fill(zero_gamma.gamma.begin(), zero_gamma.gamma.end(), 0.0);
  zero_gamma.beta = {0.5, -1.0, 2.0, 3.0};
  const auto y = temporal_batch_norm(x, zero_gamma, NormMode::kTrain);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t band = 0; band < 2; ++band)
      for (double v : y.row(1, c, band)) CHECK(v == zero_gamma.beta[c * 2 + band]);

  // Eval mode reads the running statistics and leaves them alone.
  auto q = LmtbnParams::defaults(2);
  q.running.mean = {1, 2, 3, 4};
  q.running.var = {4, 4, 4, 4};
  q.running.populated = true;
  const auto before = q.running.mean;
  const auto z = temporal_batch_norm(x, q, NormMode::kEval);
  CHECK(q.running.mean == before);
  CHECK(z(0, 1, 1, 3) == doctest::Approx((x(0, 1, 1, 3) - 4) / std::sqrt(4 + 1e-5)));

  auto wrong = LmtbnParams::defaults(3);
  CHECK_THROWS_AS(temporal_batch_norm(x, wrong, NormMode::kTrain), ShapeError);
}

TEST_CASE("lmtbn forward matches the staged composition bit for bit") {
  for (std::size_t frames : {1, 2, 99, 100}) {
    const auto x = random_energy(3, 5, frames, 9 + frames, 1e-4);
    auto fused_params = LmtbnParams::defaults(5);
    fused_params.log_gain = {5.0, 4.0, 3.0, 6.0, 5.5};
    fused_params.gamma[7] = 1.7;
    fused_params.beta[2] = -0.3;
    auto staged_params = fused_params;
    const auto fused = lmtbn_forward(x, fused_params, NormMode::kTrain);
    const auto logged = log_compress(x, staged_params.log_gain);
    const auto staged = temporal_batch_norm(stack_channels(logged, median_subtract(logged)),
                                            staged_params, NormMode::kTrain);
    CHECK(fused.channels() == 2);
    CHECK(std::equal(fused.values().begin(), fused.values().end(), staged.values().begin()));
    CHECK(fused_params.running.mean == staged_params.running.mean);
    CHECK(fused_params.running.var == staged_params.running.var);

    const auto fused_f = lmtbn_forward(cast_map<float>(x), fused_params, NormMode::kEval);
    const auto logged_f = log_compress(cast_map<float>(x), staged_params.log_gain);
    const auto staged_f = temporal_batch_norm(stack_channels(logged_f, median_subtract(logged_f)),
                                              staged_params, NormMode::kEval);
    CHECK(std::equal(fused_f.values().begin(), fused_f.values().end(), staged_f.values().begin()));
  }
}

TEST_CASE("lmtbn on silence is zero") {
  FeatureMap<float> x(2, 1, 40, 100);
  auto p = LmtbnParams::defaults(40);
  const auto y = lmtbn_forward(x, p, NormMode::kTrain);
  CHECK(y.channels() == 2);
  for (float v : y.values()) CHECK(v == 0.0f);
}

TEST_CASE("lmtbn channel 0 ignores per-band gain on loud inputs") {
  const auto x = random_energy(2, 6, 101, 10, 1e3);
  auto scaled = x;
  const double gains[] = {0.5, 2.0, 10.0, 0.1, 3.0, 1.0};
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t band = 0; band < 6; ++band)
      for (auto& v : scaled.row(b, 0, band)) v *= gains[band];
  auto p = LmtbnParams::defaults(6);
  auto q = LmtbnParams::defaults(6);
  const auto ya = lmtbn_forward(x, p, NormMode::kTrain);
  const auto yb = lmtbn_forward(scaled, q, NormMode::kTrain);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t band = 0; band < 6; ++band)
      for (std::size_t f = 0; f < 101; ++f)
        CHECK(std::abs(yb(b, 0, band, f) - ya(b, 0, band, f)) <= 1e-3);
}

}  // TEST_SUITE
