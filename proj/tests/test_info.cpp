// Copyright 2026 The fsoqkd Authors
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


#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fsoqkd/info_bounds.hpp"
#include "oracles.hpp"

using namespace fsoqkd;
using Catch::Approx;

TEST_CASE("entropy upper bound", "[info]") {
  CHECK(entropy_upper(1.0, 0.0) == Approx(oracle::gaussian_entropy_bits(1.0)).epsilon(1e-14));
  CHECK(entropy_upper(1.0, 0.0) == Approx(2.0471).epsilon(1e-4));
  // Poisson(1) entropy by direct summation.
  double hp = 0.0;
  double w = std::exp(-1.0);
  for (int k = 0; k < 40; ++k) {
    if (k > 0) w /= k;
    hp -= w * std::log2(w);
  }
  CHECK(entropy_upper(1.0, 1.0) == Approx(hp + oracle::gaussian_entropy_bits(1.0)).epsilon(1e-11));
  CHECK(entropy_upper(1.0, 1.0) == Approx(3.93).epsilon(1e-3));
  double prev = -1e300;
  for (double v : {0.001, 0.01, 0.1, 1.0, 10.0, 1000.0}) {
    const double h = entropy_upper(v, 1.0);
    CHECK(h > prev);
    prev = h;
    // Doubling the variance adds half a bit (weights sum slightly below 1).
    const auto pw = poisson_table(1.0);
    double mass = 0.0;
    for (double x : pw.w) mass += x;
    CHECK(entropy_upper(2.0 * v, 1.0) - h == Approx(0.5 * mass).epsilon(1e-12));
  }
}

TEST_CASE("entropy lower bound", "[info]") {
  CHECK(entropy_lower(1.0, 0.0) == Approx(0.5 * std::log2(4.0 * kPi)).epsilon(1e-14));
  CHECK(entropy_lower(1.0, 0.0) == Approx(1.8257).epsilon(1e-4));
  for (double v : {0.001, 0.37, 1.0, 250.0}) {
    CHECK(entropy_upper(v, 0.0) - entropy_lower(v, 0.0) ==
          Approx(0.5 * std::log2(std::numbers::e / 2.0)).epsilon(1e-12));
  }
  CHECK(0.5 * std::log2(std::numbers::e / 2.0) == Approx(0.2214).epsilon(1e-3));
  // Tiny variances must not underflow to -inf or NaN.
  CHECK(std::isfinite(entropy_lower(1e-8, 2.0)));
}

TEST_CASE("entropy oracle", "[info]") {
  const auto gauss = make_mixture(poisson_table(0.0), 0.0, 1.0);
  CHECK(std::abs(entropy_oracle(gauss) - oracle::gaussian_entropy_bits(1.0)) < 1e-6);
  const auto m0 = make_mixture(poisson_table(1.0), 0.0, 0.001);
  const auto m1 = make_mixture(poisson_table(1.0), 3.7, 0.001);
  CHECK(entropy_oracle(m0) == Approx(entropy_oracle(m1)).epsilon(1e-9));
}

TEST_CASE("entropy sandwich", "[info]") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const auto pw = poisson_table(lambda);
    for (double v : {0.01, 1.0, 100.0}) {
      const auto r = entropy_oracle_detailed(make_mixture(pw, 0.0, v), {1e-12, 1e-13});
      const double lo = entropy_lower(v, pw), hi = entropy_upper(v, pw);
      CAPTURE(lambda, v, lo, r.value, hi, r.error);
      CHECK(lo + r.error < r.value);
      CHECK(r.value + r.error < hi);
    }
  }
}

TEST_CASE("truncation stability", "[info]") {
  for (double lambda : {0.5, 1.0, 3.0}) {
    for (double v : {0.001, 1.0, 100.0}) {
      CHECK(std::abs(entropy_upper(v, lambda, 1e-12) - entropy_upper(v, lambda, 1e-14)) < 1e-9);
      CHECK(std::abs(entropy_lower(v, lambda, 1e-12) - entropy_lower(v, lambda, 1e-14)) < 1e-9);
    }
  }
}

TEST_CASE("mutual information bound", "[info]") {
  const ProtocolParams p;
  const HybridNoiseParams hn;
  for (auto proto : {Protocol::one_way, Protocol::two_way}) {
    for (auto conv : {VarianceConvention::printed, VarianceConvention::density}) {
      const auto b0 = mi_bound(proto, 0.0, p, hn, kDefaultTailTol, conv);
      CHECK(b0.received_variance == Approx(b0.noise_variance).epsilon(1e-14));
      CHECK(b0.value >= 0.0);
      CHECK(b0.value == Approx(entropy_upper(b0.noise_variance, 1.0) - entropy_lower(b0.noise_variance, 1.0)));
      for (int k = 0; k <= 20; ++k) CHECK(mi_bound(proto, 0.05 * k, p, hn).value >= 0.0);
      double prev = -1.0;
      for (double vs : {1.0, 10.0, 100.0, 1e3, 1e4}) {
        ProtocolParams q = p;
        q.modulation_variance = vs;
        const double v = mi_bound(proto, 0.4, q, hn, kDefaultTailTol, conv).value;
        CHECK(v > prev);
        prev = v;
      }
    }
  }
  CHECK(mi_bound(Protocol::one_way, 0.3, p, hn).convention == VarianceConvention::printed);
}

TEST_CASE("bound exceeds the true mutual information", "[info]") {
  ProtocolParams p;
  p.modulation_variance = 10.0;
  const HybridNoiseParams hn;
  for (auto proto : {Protocol::one_way, Protocol::two_way}) {
    const double truth = mi_oracle(proto, 0.5, p, hn);
    CAPTURE(proto, truth);
    CHECK(truth > 0.0);
    for (auto conv : {VarianceConvention::printed, VarianceConvention::density}) {
      CHECK(mi_bound(proto, 0.5, p, hn, kDefaultTailTol, conv).value >= truth);
    }
  }
}
