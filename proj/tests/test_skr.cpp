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

#include "fsoqkd/skr_engine.hpp"

using namespace fsoqkd;
using Catch::Approx;

namespace {

MonteCarloOptions mc(std::size_t n, std::uint64_t seed = 7, unsigned threads = 1) {
  MonteCarloOptions o;
  o.realizations = n;
  o.batches = 20;
  o.seed = seed;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("instantaneous key rate", "[skr]") {
  const HybridNoiseParams hn;
  for (auto proto : {Protocol::one_way, Protocol::two_way}) {
    for (double t : {0.1, 0.5, 0.9}) {
      ProtocolParams p;
      p.reconciliation = 0.0;
      CHECK(skr_instant(proto, t, p, hn) == -holevo(proto, t, p, hn));
      const double s0 = skr_instant(proto, t, p, hn);
      p.reconciliation = 1.0;
      const double s1 = skr_instant(proto, t, p, hn);
      p.reconciliation = 0.5;
      CHECK(skr_instant(proto, t, p, hn) == Approx(0.5 * (s0 + s1)).margin(1e-12));
    }
  }
  const ProtocolParams p;
  CHECK(skr_instant(Protocol::two_way, 0.5, p, hn) > skr_instant(Protocol::one_way, 0.5, p, hn));
  const SkrEvaluator eval(p, hn);
  const auto terms = eval.terms(Protocol::one_way, 0.5);
  CHECK(terms.skr == Approx(terms.mi - terms.holevo).epsilon(1e-15));
  CHECK(terms.skr == skr_instant(Protocol::one_way, 0.5, p, hn));
}

// Checked as stated. On the default parameters the one-way rate overtakes
// near T = 1 and the last point fails.
TEST_CASE("two-way dominance on [0.05, 0.95]", "[skr]") {
  const ProtocolParams p;
  const HybridNoiseParams hn;
  for (int k = 1; k <= 19; ++k) {
    const double t = 0.05 * k;
    CAPTURE(t);
    CHECK(skr_instant(Protocol::two_way, t, p, hn) >= skr_instant(Protocol::one_way, t, p, hn));
  }
}

TEST_CASE("Monte Carlo expectation", "[skr]") {
  const ProtocolParams p;
  const HybridNoiseParams hn;
  const SkrEvaluator eval(p, hn);

  SECTION("single sub-channel reduces to the scalar expectation") {
    const FixedChannel ch(1, 0.4, 0.02);
    const auto o = mc(2000);
    const auto r = skr_mimo(Protocol::one_way, ch, eval, o);
    KahanSum s;
    for (std::size_t i = 0; i < o.realizations; ++i) {
      Rng rng = make_substream(o.seed, i);
      const double t = std::min(0.4 * sample_turbulence_fade(0.02, rng), 1.0);
      s.add(eval.terms(Protocol::one_way, t).skr);
    }
    CHECK(r.total == Approx(s.value() / static_cast<double>(o.realizations)).epsilon(1e-12));
    CHECK(r.samples == o.realizations);
    CHECK(r.total_se >= 0.0);
  }

  SECTION("identical independent sub-channels add") {
    const auto o = mc(4000, 9);
    const auto one = skr_mimo(Protocol::two_way, FixedChannel(1, 0.3, 0.05), eval, o);
    const auto two = skr_mimo(Protocol::two_way, FixedChannel(2, 0.3, 0.05), eval, o);
    CHECK(std::abs(two.total - 2.0 * one.total) < 3.0 * std::hypot(two.total_se, 2.0 * one.total_se) + 1e-12);
    // The total is the exact sum of the per-sub-channel means.
    CHECK(two.total == two.per_subchannel[0].skr + two.per_subchannel[1].skr);
  }

  SECTION("fixed seed and thread count do not change the result") {
    const FixedChannel ch(3, 0.6, 0.1);
    const auto a = skr_mimo_pair(ch, eval, mc(1500, 3, 1));
    const auto b = skr_mimo_pair(ch, eval, mc(1500, 3, 1));
    const auto c = skr_mimo_pair(ch, eval, mc(1500, 3, 4));
    for (int k = 0; k < 2; ++k) {
      CHECK(a[k].total == b[k].total);
      CHECK(a[k].total == c[k].total);
      CHECK(a[k].total_se == c[k].total_se);
      for (std::size_t i = 0; i < 3; ++i) CHECK(a[k].per_subchannel[i].skr == c[k].per_subchannel[i].skr);
    }
    const auto d = skr_mimo_pair(ch, eval, mc(1500, 4, 1));
    CHECK(a[0].total != d[0].total);
  }

  SECTION("no transmission is flagged") {
    const auto r = skr_mimo(Protocol::one_way, FixedChannel(2, 0.0), eval, mc(50));
    CHECK(r.all_degenerate);
    CHECK(r.total == 0.0);
    CHECK(r.degenerate_count == 100);
  }

  SECTION("physical channel with one aperture pair") {
    BeamGeometry g;
    g.place_square_arrays();
    const PhysicalChannel ch(g, TurbulenceParams{});
    const auto o = mc(300);
    const auto r = skr_mimo(Protocol::one_way, ch, eval, o);
    KahanSum s;
    for (std::size_t i = 0; i < o.realizations; ++i) {
      Rng rng = make_substream(o.seed, i);
      const auto real = ch.realize(rng);
      s.add(eval.terms(Protocol::one_way, real.effective_T[0]).skr);
    }
    CHECK(r.total == Approx(s.value() / static_cast<double>(o.realizations)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(skr_mimo(Protocol::one_way, FixedChannel(1, 0.5), eval, mc(0)), DomainError);
}

TEST_CASE("asymptotic expressions", "[skr]") {
  const HybridNoiseParams hn;
  ProtocolParams p;
  p.vacuum_variance = 1.0;
  const auto r = asymptotic_report(Protocol::one_way, 0.5, p, hn);
  CHECK(r.eigen_terms[1] == Approx(500.0));
  CHECK(r.low_vs_over_vacuum == false);
  CHECK(r.low_vs_over_gauss == false);
  CHECK(r.low_vs_over_eve == false);
  p.modulation_variance = 1e6;
  const auto big = asymptotic_report(Protocol::one_way, 0.5, p, hn);
  CHECK(big.holevo == Approx(0.5 * std::log2(0.25e6)).epsilon(1e-14));
  CHECK(big.holevo == Approx(8.97).epsilon(1e-3));
  CHECK(big.skr == Approx(big.mi - big.holevo));
  const auto two = asymptotic_report(Protocol::two_way, 0.5, p, hn);
  CHECK(two.eigen_terms.size() == 6);
  CHECK(std::isfinite(two.holevo));
  p.modulation_variance = 100.0;
  CHECK(asymptotic_report(Protocol::two_way, 0.5, p, hn).low_vs_over_vacuum);
  CHECK_THROWS_AS(asymptotic_report(Protocol::one_way, 0.0, p, hn), DomainError);
  CHECK_THROWS_AS(asymptotic_report(Protocol::two_way, 1.0, p, hn), DomainError);
}

TEST_CASE("differential key rate", "[skr]") {
  ProtocolParams p;
  p.vacuum_variance = 1.0;
  const HybridNoiseParams hn;
  const auto d = delta_skr(0.1, p, hn);
  CHECK(d.small_t == Approx(0.5 * std::log2(1.01)).epsilon(1e-14));
  CHECK(d.small_t == Approx(0.00718).epsilon(1e-3));
  CHECK_FALSE(d.assumption_violated);
  const auto z = delta_skr(0.0, p, hn);
  CHECK(z.small_t == 0.0);
  CHECK(std::abs(z.full) < 1e-12);
  p.eve_variance = 2.0;
  CHECK(delta_skr(0.1, p, hn).assumption_violated);
}

// The mutual information converges to its asymptote while the Holevo terms
// keep a fixed offset, so the relative Holevo gap shrinks and the key-rate
// gap settles to a constant.
TEST_CASE("full key rate approaches the asymptote", "[skr]") {
  const HybridNoiseParams hn;
  for (auto proto : {Protocol::one_way, Protocol::two_way}) {
    double prev_rel = 1e300, prev_gap = 0.0, prev_step = 1e300;
    for (double vs : {1e3, 1e4, 1e5, 1e6, 1e7}) {
      ProtocolParams p;
      p.modulation_variance = vs;
      const auto a = asymptotic_report(proto, 0.5, p, hn);
      const double full_h = holevo(proto, 0.5, p, hn);
      const double rel = std::abs(full_h - a.holevo) / full_h;
      const double gap = skr_instant(proto, 0.5, p, hn) - a.skr;
      CAPTURE(proto, vs, rel, gap);
      CHECK(rel < prev_rel);
      CHECK(std::abs(mi_bound(proto, 0.5, p, hn).value - a.mi) < 1e-2);
      if (vs > 1e3) {
        const double step = std::abs(gap - prev_gap);
        CHECK(step < prev_step);
        prev_step = step;
      }
      prev_rel = rel;
      prev_gap = gap;
    }
    CHECK(prev_step < 1e-4);
  }
}
