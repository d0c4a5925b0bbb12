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
#include <vector>

#include "fsoqkd/channel_model.hpp"
#include "oracles.hpp"

using namespace fsoqkd;
using Catch::Approx;

namespace {

BeamGeometry geometry(int n, double z = 200.0) {
  BeamGeometry g;
  g.tx_count = n;
  g.rx_count = n;
  g.link_distance = z;
  g.place_square_arrays();
  return g;
}

}  // namespace

TEST_CASE("gaussian beam field", "[channel]") {
  const double w = 2.5e-3;
  CHECK(gaussian_beam_field(0.0, w) == Approx(319.15).epsilon(1e-4));
  CHECK(gaussian_beam_field(w, w) == Approx(gaussian_beam_field(0.0, w) * std::exp(-1.0)).epsilon(1e-14));
  const double power = integrate([&](double r) { return kTwoPi * r * std::pow(gaussian_beam_field(r, w), 2); }, 0.0,
                                 20.0 * w, {1e-14, 1e-12})
                           .value;
  CHECK(power == Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(gaussian_beam_field(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(gaussian_beam_field(0.0, -1.0), DomainError);
}

TEST_CASE("spatial spectrum", "[channel]") {
  const BeamGeometry g = geometry(32);
  // Gaussian moment limit for a wide aperture.
  CHECK(spatial_spectrum(0.0, g) == Approx(g.waist * std::sqrt(kTwoPi)).epsilon(1e-8));
  CHECK(spatial_spectrum(0.0, g) == Approx(6.266e-3).epsilon(1e-4));
  // Decay at high spatial frequency.
  const double f0 = spatial_spectrum(0.0, g);
  double prev = f0;
  for (double rho : {200.0, 400.0, 800.0, 1600.0}) {
    const double f = std::abs(spatial_spectrum(rho, g));
    CHECK(f < prev);
    prev = f;
  }
  CHECK(prev < 1e-6 * f0);
  CHECK_THROWS_AS(spatial_spectrum(-1.0, g), DomainError);
}

TEST_CASE("inverse Hankel transform of the spectrum recovers the field", "[channel]") {
  const BeamGeometry g = geometry(32);
  const double w = g.waist;
  // The Gaussian spectrum is below 1e-30 of its peak beyond 8.4 / (pi w).
  const double rho_hi = 8.4 / (kPi * w);
  const ChebyshevInterpolant spec(0.0, rho_hi, 160, [&](double rho) { return spatial_spectrum(rho, g); });
  auto inverse = [&](double r) {
    auto f = [&](double rho) { return kTwoPi * rho * spec(rho) * bessel_j0(kTwoPi * r * rho); };
    const auto bp = bessel_breakpoints(0.0, rho_hi, kTwoPi * r);
    return integrate(f, std::span<const double>(bp), {1e-13, 1e-11}).value;
  };
  const double e0 = gaussian_beam_field(0.0, w);
  // Relative accuracy where the field is appreciable, absolute further out
  // where it falls below 1e-4 of the peak.
  for (double r : {0.0, 0.25 * w, 0.5 * w, w, 1.5 * w, 2.0 * w, 3.0 * w}) {
    const double e = gaussian_beam_field(r, w);
    CHECK(std::abs(inverse(r) - e) <= 1e-6 * e);
  }
  for (double r : {4.0 * w, 5.0 * w, g.tx_aperture_radius() * 0.98}) {
    CHECK(std::abs(inverse(r) - gaussian_beam_field(r, w)) <= 1e-10 * e0);
  }
}

TEST_CASE("propagated field", "[channel]") {
  SECTION("zero distance reproduces the aperture field") {
    // The printed band limit cuts the Gaussian spectrum at 1/e, so this
    // check uses a wider band that contains it, and a large array so the
    // aperture edge does not ring.
    BeamGeometry g = geometry(32, 0.0);
    g.band_limit_override = 4.0 / (kPi * g.waist);
    for (double r : {0.0, 0.3 * g.waist, 0.7 * g.waist, g.waist}) {
      const Complex v = propagated_field(r, g);
      const double e = gaussian_beam_field(r, g.waist);
      CHECK(std::abs(v - e) <= 1e-3 * e);
    }
  }
  SECTION("on-axis field weakens with distance") {
    const double near = std::abs(propagated_field(0.0, geometry(4, 0.0)));
    const double far = std::abs(propagated_field(0.0, geometry(4, 200.0)));
    CHECK(far < near);
  }
  SECTION("band power is conserved") {
    BeamGeometry g0 = geometry(4, 200.0), g1 = geometry(4, 1000.0);
    g0.rx_lens_radius = g1.rx_lens_radius = 1.0;
    const BeamPropagator p0(g0, 0.01), p1(g1, 0.01);
    CHECK(p0.band_power() == Approx(p1.band_power()).epsilon(1e-12));
    CHECK(p0.disc_power(0.0) == Approx(p0.band_power()).epsilon(1e-3));
    CHECK(p1.disc_power(0.0) == Approx(p0.band_power()).epsilon(1e-3));
  }
  SECTION("tabulated field agrees with direct quadrature") {
    const BeamGeometry g = geometry(4);
    const BeamPropagator p(g, 0.05);
    for (double r : {0.0, 0.01, 0.03, 0.1}) {
      const Complex direct = propagated_field(r, g);
      CHECK(std::abs(p.field(r) - direct) <= 1e-6 * std::abs(p.field(0.0)));
    }
  }
  SECTION("evanescent band is rejected") {
    BeamGeometry g = geometry(1);
    g.band_limit_override = 1.0 / g.wavelength;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    CHECK_THROWS_AS(propagated_field(0.0, g), ConfigError);
  }
}

TEST_CASE("channel gain", "[channel]") {
  SECTION("aperture normalisation") {
    CHECK(std::abs(aperture_normalization(geometry(32)) - 1.0) < 1e-10);
    CHECK(std::abs(aperture_normalization(geometry(16)) - 1.0) < 1e-10);
    CHECK(aperture_normalization(geometry(4)) == Approx(std::sqrt(1.0 - std::exp(-8.0))).epsilon(1e-12));
  }
  const BeamGeometry g = geometry(1);
  const BeamPropagator prop(g, 0.02);
  SECTION("radial symmetry for an on-axis receiver") {
    for (Vec2 off : {Vec2{1e-3, 0.0}, Vec2{2e-3, 3e-3}, Vec2{-7e-3, 4e-3}}) {
      CHECK(std::abs(channel_gain(0, 0, off, prop)) == Approx(std::abs(channel_gain(0, 0, -off, prop))).epsilon(1e-6));
    }
  }
  SECTION("gain magnitude decreases with offset") {
    // Holds for the captured-power gain. The printed amplitude integrates a
    // complex field and oscillates while the disc still covers the beam.
    const BeamPropagator wide(g, 0.3);
    double prev = std::abs(wide.gain(0.0, GainModel::captured_power));
    for (int s = 1; s <= 24; ++s) {
      const double m = std::abs(wide.gain(0.0125 * s, GainModel::captured_power));
      CHECK(m <= prev);
      prev = m;
    }
    const double on_axis = std::abs(wide.gain(0.0, GainModel::printed_amplitude));
    CHECK(std::abs(wide.gain(0.2, GainModel::printed_amplitude)) < 1e-2 * on_axis);
  }
  SECTION("direct disc integral agrees with the tabulated one") {
    for (double d : {0.0, 0.004, 0.012}) {
      const Complex a = channel_gain(0, 0, {d, 0.0}, prop);
      const Complex b = prop.gain(d, GainModel::printed_amplitude);
      CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
    }
  }
  CHECK_THROWS_AS(channel_gain(1, 0, {0.0, 0.0}, prop), DomainError);
}

TEST_CASE("misalignment statistics", "[channel]") {
  BeamGeometry g = geometry(1);
  TurbulenceParams t;
  t.cn2 = 0.0;
  t.pointing_jitter = 1e-6;
  CHECK(misalignment_sigma(t, g) == Approx(2.0e-4).epsilon(1e-12));
  TurbulenceParams tb;
  tb.cn2 = 1e-15;
  tb.pointing_jitter = 0.0;
  const double s_tb = misalignment_sigma(tb, g);
  // Independent evaluation through the coherence radius.
  const double k = kTwoPi / 1550e-9;
  const double rc = std::pow(0.423 * k * k * 1e-15 * 200.0, -3.0 / 5.0);
  const double ref = std::sqrt(0.1337 * 1550e-9 * 1550e-9 * 200.0 * 200.0 * std::pow(2.5e-3, -1.0 / 3.0) *
                               std::pow(rc, -5.0 / 3.0));
  CHECK(s_tb == Approx(ref).epsilon(1e-12));
  CHECK(s_tb == Approx(3.6e-4).epsilon(0.1));
  TurbulenceParams both;
  CHECK(misalignment_sigma(both, g) >= std::max(2.0e-4, s_tb));
  CHECK(misalignment_sigma(both, g) == misalignment_sigma(both, g));

  SECTION("Rayleigh sampling") {
    const double sigma = 3e-4;
    Rng rng = make_substream(11, 0);
    std::vector<double> v(1000000);
    for (auto& x : v) x = sample_misalignment(sigma, rng);
    const auto m = oracle::moments(v);
    CHECK(std::abs(m.mean - sigma * std::sqrt(kPi / 2.0)) < 3.0 * m.mean_se);
    std::vector<double> s = v;
    std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
    const double median = s[s.size() / 2];
    const double med_ref = sigma * std::sqrt(2.0 * std::log(2.0));
    // Median SE: 1 / (2 f(m) sqrt(n)).
    const double f_m = med_ref / (sigma * sigma) * std::exp(-med_ref * med_ref / (2.0 * sigma * sigma));
    CHECK(std::abs(median - med_ref) < 3.0 / (2.0 * f_m * std::sqrt(1e6)));
    v.resize(100000);
    const double d = oracle::ks_statistic(v, [&](double x) { return -std::expm1(-x * x / (2.0 * sigma * sigma)); });
    CHECK(d < oracle::ks_critical_1pct(v.size()));
    CHECK(sample_misalignment(0.0, rng) == 0.0);
  }
}

TEST_CASE("scintillation variance", "[channel]") {
  const BeamGeometry g = geometry(1);
  TurbulenceParams t;
  t.cn2 = 0.0;
  CHECK(scintillation_variance(t, g) == 0.0);
  t.cn2 = 1e-15;
  const double s2 = scintillation_variance(t, g);
  CHECK(s2 == Approx(1.4e-5).epsilon(0.05));
  CHECK(s2 == Approx(oracle::scintillation_eq(1e-15, 1550e-9, 200.0, 0.1)).epsilon(1e-12));
  double prev = -1.0;
  for (double e = -17.0; e <= -14.0 + 1e-9; e += 0.25) {
    t.cn2 = std::pow(10.0, e);
    const double v = scintillation_variance(t, g);
    CHECK(v > prev);
    prev = v;
  }
  BeamGeometry g0 = g;
  g0.link_distance = 0.0;
  CHECK_THROWS_AS(scintillation_variance(t, g0), DomainError);
}

TEST_CASE("turbulence fade sampling", "[channel]") {
  const double s2 = 0.05;
  Rng rng = make_substream(12, 0);
  std::vector<double> v(1000000);
  for (auto& x : v) x = sample_turbulence_fade(s2, rng);
  const auto m = oracle::moments(v);
  CHECK(std::abs(m.mean - 1.0) < 3.0 * m.mean_se);
  CHECK(std::abs(m.var - std::expm1(s2)) < 3.0 * m.var_se);
  v.resize(100000);
  const double d = oracle::ks_statistic(v, [&](double x) {
    return 0.5 * std::erfc(-(std::log(x) + s2 / 2.0) / std::sqrt(2.0 * s2));
  });
  CHECK(d < oracle::ks_critical_1pct(v.size()));
  for (int i = 0; i < 10; ++i) CHECK(sample_turbulence_fade(0.0, rng) == 1.0);
}

TEST_CASE("atmospheric attenuation", "[channel]") {
  CHECK(atmospheric_attenuation(0.43e-3, 1000.0) == Approx(std::pow(10.0, -0.043)).epsilon(1e-14));
  CHECK(atmospheric_attenuation(0.43e-3, 1000.0) == Approx(0.9057).epsilon(1e-4));
  CHECK(atmospheric_attenuation(0.43e-3, 0.0) == 1.0);
  CHECK(atmospheric_attenuation(0.0, 5000.0) == 1.0);
}

TEST_CASE("singular transmittances", "[channel]") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = 0.3;
  d(1, 1) = Complex(0.0, -0.8);
  d(2, 2) = 0.5;
  const auto sd = singular_transmittances(d);
  REQUIRE(sd.rank == 3);
  CHECK(sd.singular_values(0) == Approx(0.8));
  CHECK(sd.beta[0] == Approx(0.64).epsilon(1e-14));
  CHECK(sd.beta[1] == Approx(0.25).epsilon(1e-14));
  CHECK(sd.beta[2] == Approx(0.09).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd h(4, 3);
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = Complex(n(rng), n(rng));
    const auto s = singular_transmittances(h);
    double sum = 0.0;
    for (double b : s.beta) sum += b;
    CHECK(sum == Approx(h.squaredNorm()).epsilon(1e-12));
    CHECK(std::is_sorted(s.beta.rbegin(), s.beta.rend()));
    Eigen::MatrixXcd sig = Eigen::MatrixXcd::Zero(4, 3);
    for (Eigen::Index i = 0; i < s.singular_values.size(); ++i) sig(i, i) = s.singular_values(i);
    CHECK((s.u * sig * s.v.adjoint() - h).cwiseAbs().maxCoeff() < 1e-10);
  }
  // Rank deficiency.
  Eigen::MatrixXcd r1 = Eigen::MatrixXcd::Ones(3, 3);
  CHECK(singular_transmittances(r1).rank == 1);
}

TEST_CASE("physical channel realisations", "[channel]") {
  const BeamGeometry g = geometry(4);
  TurbulenceParams t;
  const PhysicalChannel ch(g, t);
  CHECK(ch.subchannel_count() == 4);
  Rng a = make_substream(3, 0), b = make_substream(3, 0);
  for (int r = 0; r < 50; ++r) {
    const auto x = ch.realize(a);
    const auto y = ch.realize(b);
    CHECK(x.effective_T == y.effective_T);
    CHECK(x.rank <= 4);
    CHECK(std::is_sorted(x.singular_transmittances.rbegin(), x.singular_transmittances.rend()));
    CHECK(x.atmospheric_attenuation <= 1.0);
    CHECK(x.atmospheric_attenuation >= 0.0);
    for (double f : x.fades) CHECK(f > 0.0);
    for (std::size_t i = 0; i < x.effective_T.size(); ++i) {
      CHECK(x.effective_T[i] >= 0.0);
      CHECK(x.effective_T[i] <= 1.0);
      if (static_cast<int>(i) < x.rank) {
        CHECK(x.effective_T[i] == Approx(t.detector_efficiency * x.atmospheric_attenuation * x.fades[i] *
                                         x.singular_transmittances[i])
                                      .epsilon(1e-15));
      }
    }
  }
  // Tables are shared when the geometry matches.
  const PhysicalChannel again(g, t, {}, ch.shared_propagator());
  CHECK(&again.propagator() == &ch.propagator());
}
