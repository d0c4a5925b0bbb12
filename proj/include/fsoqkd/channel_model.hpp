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

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/quadrature.hpp"

namespace fsoqkd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

// How the complex entries of H are formed from the received field.
//   captured_power:    |h|^2 is the fraction of transmitted power falling on
//                      the receiver disc; the phase is that of the field
//                      integral. Keeps |h| dimensionless.
//   printed_amplitude: h is the disc integral of the field divided by the
//                      aperture normalisation, which carries units of metres.
enum class GainModel { captured_power, printed_amplitude };

// Where each transmit beam is centred in the receiver plane before the
// random misalignment is added.
//   aimed:    beam j is steered to receiver (j mod N_R).
//   parallel: beam j propagates straight from its own sub-aperture.
enum class BeamPointing { aimed, parallel };

// n points on a square grid with the given pitch, centred on the origin and
// filled row by row.
inline std::vector<Vec2> square_grid(int n, double pitch) {
  std::vector<Vec2> pts;
  if (n <= 0) return pts;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12));
  const int rows = (n + cols - 1) / cols;
  const double x0 = -0.5 * (cols - 1) * pitch;
  const double y0 = -0.5 * (rows - 1) * pitch;
  for (int k = 0; k < n; ++k) {
    pts.push_back({x0 + (k % cols) * pitch, y0 + (k / cols) * pitch});
  }
  return pts;
}

struct BeamGeometry {
  double wavelength = 1550e-9;     // m
  double waist = 2.5e-3;           // m
  int tx_count = 1;
  int rx_count = 1;
  double rx_lens_radius = 0.1;     // m
  double link_distance = 200.0;    // m
  double band_limit_override = 0;  // cycles/m; 0 keeps sin(lambda/(pi w))/lambda
  std::vector<Vec2> tx_positions{{0.0, 0.0}};
  std::vector<Vec2> rx_positions{{0.0, 0.0}};

  bool operator==(const BeamGeometry&) const = default;

  double wavenumber() const { return kTwoPi / wavelength; }
  double tx_aperture_radius() const { return std::sqrt(static_cast<double>(tx_count)) * waist; }
  double band_limit() const {
    if (band_limit_override > 0.0) return band_limit_override;
    return std::sin(wavelength / (kPi * waist)) / wavelength;
  }

  // Places both arrays on centred square grids. A non-positive pitch selects
  // the default of three waists (TX) or three lens radii (RX).
  void place_square_arrays(double tx_pitch = 0.0, double rx_pitch = 0.0) {
    tx_positions = square_grid(tx_count, tx_pitch > 0.0 ? tx_pitch : 3.0 * waist);
    rx_positions = square_grid(rx_count, rx_pitch > 0.0 ? rx_pitch : 3.0 * rx_lens_radius);
  }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be > 0");
    };
    positive(wavelength, "wavelength");
    positive(waist, "waist");
    positive(rx_lens_radius, "rx_lens_radius");
    positive(link_distance, "link_distance");
    if (tx_count < 1 || rx_count < 1) throw ConfigError("tx_count and rx_count must be ≥ 1");
    if (band_limit_override < 0.0) throw ConfigError("band_limit_override must be ≥ 0");
    if (!(band_limit() > 0.0)) throw ConfigError("band limit must be > 0");
    // Keeps the propagation kernel away from the evanescent branch.
    if (!(kTwoPi * band_limit() < wavenumber())) {
      throw ConfigError("band limit must satisfy 2*pi*rho_max < k");
    }
    if (tx_positions.size() != static_cast<std::size_t>(tx_count) ||
        rx_positions.size() != static_cast<std::size_t>(rx_count)) {
      throw ConfigError("position lists must match tx_count / rx_count");
    }
  }
};

struct TurbulenceParams {
  double cn2 = 1e-15;                  // m^(-2/3)
  double pointing_jitter = 1e-6;       // rad
  double attenuation_db_per_m = 0.43e-3;
  double detector_efficiency = 1.0;

  void validate() const {
    if (!(cn2 >= 0.0)) throw ConfigError("Cn2 must be ≥ 0");
    if (!(pointing_jitter >= 0.0)) throw ConfigError("pointing jitter must be ≥ 0");
    if (!(attenuation_db_per_m >= 0.0)) throw ConfigError("attenuation coefficient must be ≥ 0");
    if (!(detector_efficiency >= 0.0 && detector_efficiency <= 1.0)) {
      throw ConfigError("detector efficiency must lie in [0, 1]");
    }
  }
};

struct ChannelRealization {
  Eigen::MatrixXcd gain_matrix;
  std::vector<double> singular_transmittances;  // beta_i, descending
  int rank = 0;
  std::vector<double> fades;                    // T_t,i
  double atmospheric_attenuation = 1.0;         // T_a
  std::vector<double> effective_T;              // T_i after clamping
  Vec2 misalignment;
  int clamp_count = 0;
};

// ---------------------------------------------------------------------------
// Field distributions

inline double gaussian_beam_field(double r, double w) {
  if (!(w > 0.0)) throw DomainError("gaussian_beam_field: waist must be > 0");
  if (!(r >= 0.0)) throw DomainError("gaussian_beam_field: r must be >= 0");
  return std::sqrt(2.0 / (kPi * w * w)) * std::exp(-(r * r) / (w * w));
}

// Hankel-type spectrum of the aperture-truncated Gaussian field.
inline double spatial_spectrum(double rho, const BeamGeometry& g, Tolerance tol = {}) {
  if (!(rho >= 0.0)) throw DomainError("spatial_spectrum: rho must be >= 0");
  const double w = g.waist;
  const double r0 = g.tx_aperture_radius();
  auto f = [&](double r) { return kTwoPi * r * gaussian_beam_field(r, w) * bessel_j0(kTwoPi * r * rho); };
  const auto bp = bessel_breakpoints(0.0, r0, kTwoPi * rho);
  return integrate(f, std::span<const double>(bp), tol).value;
}

// Aperture normalisation sqrt(2 pi int_0^R0 r |E|^2 dr), by quadrature.
inline double aperture_normalization(const BeamGeometry& g, Tolerance tol = {1e-14, 1e-13}) {
  const double w = g.waist;
  auto f = [&](double r) {
    const double e = gaussian_beam_field(r, w);
    return kTwoPi * r * e * e;
  };
  return std::sqrt(integrate(f, 0.0, g.tx_aperture_radius(), tol).value);
}

namespace detail {

// exp(j*sqrt(k^2 - q^2)*z) split as exp(jkz) * exp(-j*q^2*z/(k + sqrt(k^2 - q^2))),
// which avoids cancellation in the small-angle regime.
inline Complex propagation_phase(double rho, double k, double z) {
  const double q = kTwoPi * rho;
  const double kz = std::sqrt(k * k - q * q);
  const double excess = -q * q * z / (k + kz);
  return std::polar(1.0, std::remainder(k * z, kTwoPi) + excess);
}

// Spatial frequencies at which the excess propagation phase passes a
// multiple of pi.
inline std::vector<double> phase_breakpoints(double rho_max, double k, double z) {
  std::vector<double> pts;
  if (!(z > 0.0)) return pts;
  for (int m = 1;; ++m) {
    const double kz = k - m * kPi / z;
    if (kz <= 0.0) break;
    const double rho = std::sqrt(k * k - kz * kz) / kTwoPi;
    if (rho >= rho_max) break;
    pts.push_back(rho);
  }
  return pts;
}

// Half-angle of the arc of the circle |s| = r (about the beam centre) lying
// inside a disc of radius a whose centre is at distance d.
inline double arc_half_angle(double r, double d, double a) {
  if (r + d <= a) return kPi;
  if (r >= d + a || r <= d - a) return 0.0;
  const double c = (r * r + d * d - a * a) / (2.0 * r * d);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace detail

// Received field at radial distance r from the beam centre, by direct
// nested quadrature (the spectrum is re-evaluated at every node). Slow;
// BeamPropagator is the tabulated equivalent.
inline Complex propagated_field(double r, const BeamGeometry& g, Tolerance tol = {}) {
  if (!(r >= 0.0)) throw DomainError("propagated_field: r must be >= 0");
  if (!(g.link_distance >= 0.0)) throw DomainError("propagated_field: z must be >= 0");
  const double k = g.wavenumber();
  const double rho_max = g.band_limit();
  if (!(kTwoPi * rho_max < k)) throw ConfigError("band limit must satisfy 2*pi*rho_max < k");
  const double z = g.link_distance;
  auto f = [&](double rho) -> Complex {
    return kTwoPi * rho * spatial_spectrum(rho, g) * bessel_j0(kTwoPi * r * rho) *
           detail::propagation_phase(rho, k, z);
  };
  const auto extra = detail::phase_breakpoints(rho_max, k, z);
  const auto bp = bessel_breakpoints(0.0, rho_max, kTwoPi * r, extra);
  return integrate(f, std::span<const double>(bp), tol).value;
}

// Tabulated received field for one geometry. The spectrum is interpolated on
// Chebyshev nodes; the field G(r) and the disc integrals of G and |G|^2 are
// tabulated on a uniform grid fine enough to resolve the highest spatial
// frequency of the band-limited field.
class BeamPropagator {
 public:
  // d_max bounds the distance between a beam centre and a receiver centre.
  BeamPropagator(const BeamGeometry& g, double d_max, int samples_per_period = 64,
                 std::size_t spectrum_nodes = 64)
      : geom_(g), d_max_(d_max), samples_per_period_(samples_per_period) {
    g.validate();
    if (!(d_max >= 0.0)) throw DomainError("BeamPropagator: d_max must be >= 0");
    const double rho_max = g.band_limit();
    const double k = g.wavenumber();
    const double z = g.link_distance;
    const double a = g.rx_lens_radius;
    spectrum_ = ChebyshevInterpolant(0.0, rho_max, spectrum_nodes,
                                     [&](double rho) { return spatial_spectrum(rho, g); });
    norm_ = aperture_normalization(g);

    const double r_max = d_max + a;
    step_ = 1.0 / (samples_per_period * rho_max);
    const auto n_r = static_cast<std::size_t>(std::ceil(r_max / step_)) + 4;

    // One rule over rho serves every table entry: panels follow the J0
    // zeros at the largest radius and the turns of the propagation phase.
    const auto extra = detail::phase_breakpoints(rho_max, k, z);
    const auto bp = bessel_breakpoints(0.0, rho_max, kTwoPi * (n_r * step_), extra);
    const auto rule = composite_gauss_legendre(bp);
    const std::size_t n_nodes = rule.nodes.size();
    std::vector<Complex> cg(n_nodes), ca(n_nodes);
    KahanSum band;
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const double rho = rule.nodes[n];
      const double f = spectrum_(rho);
      cg[n] = rule.weights[n] * kTwoPi * rho * f * detail::propagation_phase(rho, k, z);
      // Disc of radius a: int_disc J0(2 pi rho |s - d|) ds = a J1(2 pi a rho) J0(2 pi d rho) / rho.
      ca[n] = rule.weights[n] * kTwoPi * f * a * bessel_j1(kTwoPi * a * rho) *
              detail::propagation_phase(rho, k, z);
      band.add(rule.weights[n] * kTwoPi * rho * f * f);
    }
    band_power_ = band.value();

    std::vector<Complex> g_vals(n_r), a_vals(n_r);
    for (std::size_t m = 0; m < n_r; ++m) {
      const double r = m * step_;
      Complex sg{}, sa{};
      for (std::size_t n = 0; n < n_nodes; ++n) {
        const double j0 = bessel_j0(kTwoPi * r * rule.nodes[n]);
        sg += cg[n] * j0;
        sa += ca[n] * j0;
      }
      g_vals[m] = sg;
      a_vals[m] = sa;
    }
    field_ = UniformTable<Complex>(step_, std::move(g_vals));
    amplitude_ = UniformTable<Complex>(step_, std::move(a_vals));

    // Disc integral of |G|^2 by arc length about the beam centre.
    const auto n_d = static_cast<std::size_t>(std::ceil(d_max / step_)) + 4;
    std::vector<double> p_vals(n_d);
    const double period = 1.0 / rho_max;
    for (std::size_t m = 0; m < n_d; ++m) {
      p_vals[m] = disc_power_direct(m * step_, period);
    }
    power_ = UniformTable<double>(step_, std::move(p_vals));
  }

  const BeamGeometry& geometry() const { return geom_; }
  double d_max() const { return d_max_; }
  double r_max() const { return field_.upper(); }
  double step() const { return step_; }
  int samples_per_period() const { return samples_per_period_; }

  double spectrum(double rho) const { return spectrum_(rho); }
  Complex field(double r) const { return field_(r); }

  // int over the receiver disc of G, the disc centre at distance d from the
  // beam centre.
  Complex disc_amplitude(double d) const { return amplitude_(check_d(d)); }
  // int over the receiver disc of |G|^2.
  double disc_power(double d) const { return power_(check_d(d)); }

  // 2 pi int rho F^2 d rho over the band, equal to the power in G.
  double band_power() const { return band_power_; }
  // Aperture normalisation (denominator of the gain).
  double normalization() const { return norm_; }

  Complex gain(double d, GainModel model) const {
    const Complex amp = disc_amplitude(d);
    if (model == GainModel::printed_amplitude) return amp / norm_;
    const double p = std::max(disc_power(d), 0.0);
    const double mag = std::sqrt(p) / norm_;
    const double abs_amp = std::abs(amp);
    return abs_amp > 0.0 ? mag * (amp / abs_amp) : Complex(mag, 0.0);
  }

 private:
  double check_d(double d) const {
    if (!(d >= 0.0) || d > d_max_ * (1.0 + 1e-12) + 1e-15) {
      throw DomainError("BeamPropagator: offset outside tabulated range");
    }
    return d;
  }

  double disc_power_direct(double d, double period) const {
    const double a = geom_.rx_lens_radius;
    const double lo = std::max(0.0, d - a);
    const double hi = d + a;
    std::vector<double> bp{lo, hi};
    if (a - d > 0.0 && a - d < hi) bp.push_back(a - d);
    for (double x = lo + period; x < hi; x += period) bp.push_back(x);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    auto f = [&](double r) {
      const double alpha = d > 0.0 ? detail::arc_half_angle(r, d, a) : (r < a ? kPi : 0.0);
      return 2.0 * r * alpha * std::norm(field_(r));
    };
    // The tabulated field is piecewise cubic, so asking for more than the
    // table accuracy (~1e-7 relative) only burns evaluations at cell edges.
    return integrate(f, std::span<const double>(bp), {1e-11, 1e-7}, 200000).value;
  }

  BeamGeometry geom_;
  double d_max_;
  int samples_per_period_;
  double step_ = 0.0;
  double norm_ = 1.0;
  double band_power_ = 0.0;
  ChebyshevInterpolant spectrum_;
  UniformTable<Complex> field_;
  UniformTable<Complex> amplitude_;
  UniformTable<double> power_;
};

// Centre of beam j in the receiver plane before misalignment.
inline Vec2 beam_centre(const BeamGeometry& g, int j, BeamPointing pointing) {
  if (pointing == BeamPointing::aimed) {
    return g.rx_positions[static_cast<std::size_t>(j % g.rx_count)];
  }
  return g.tx_positions[static_cast<std::size_t>(j)];
}

// Disc integral of the field for the (tx j, rx i) pair by 2-D quadrature in
// polar coordinates about the receiver centre, divided by the aperture
// normalisation. Uses the tabulated field; independent of the tabulated disc
// integrals.
inline Complex channel_gain(int j, int i, Vec2 misalignment, const BeamPropagator& prop,
                            BeamPointing pointing = BeamPointing::aimed,
                            Tolerance tol = {1e-14, 1e-7}) {
  const auto& g = prop.geometry();
  if (j < 0 || j >= g.tx_count || i < 0 || i >= g.rx_count) {
    throw DomainError("channel_gain: index out of range");
  }
  const Vec2 rel = g.rx_positions[static_cast<std::size_t>(i)] -
                   (beam_centre(g, j, pointing) + misalignment);
  const double a = g.rx_lens_radius;
  const double period = 1.0 / g.band_limit();
  auto ring = [&](double s) -> Complex {
    auto f = [&](double th) { return prop.field(std::hypot(rel.x + s * std::cos(th), rel.y + s * std::sin(th))); };
    std::vector<double> bp{0.0};
    const int pieces = std::max(4, static_cast<int>(std::ceil(2.0 * s / period)));
    for (int p = 1; p <= pieces; ++p) bp.push_back(kTwoPi * p / pieces);
    return s * integrate(f, std::span<const double>(bp), {tol.abs, tol.rel}, 100000).value;
  };
  std::vector<double> bp{0.0};
  const int pieces = std::max(4, static_cast<int>(std::ceil(a / period)));
  for (int p = 1; p <= pieces; ++p) bp.push_back(a * p / pieces);
  const Complex num = integrate(ring, std::span<const double>(bp), tol, 100000).value;
  return num / prop.normalization();
}

// ---------------------------------------------------------------------------
// Misalignment and turbulence statistics

inline double misalignment_sigma(const TurbulenceParams& t, const BeamGeometry& g) {
  const double z = g.link_distance;
  const double k = g.wavenumber();
  const double sp2 = (t.pointing_jitter * z) * (t.pointing_jitter * z);
  // r_c^(-5/3) = 0.423 k^2 Cn2 z exactly, which also covers Cn2 = 0 without
  // forming the infinite Fried parameter.
  const double rc_m53 = 0.423 * k * k * t.cn2 * z;
  const double stb2 = 0.1337 * g.wavelength * g.wavelength * z * z * std::pow(g.waist, -1.0 / 3.0) * rc_m53;
  return std::sqrt(sp2 + stb2);
}

// Rayleigh-distributed radial displacement.
inline double sample_misalignment(double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw DomainError("sample_misalignment: sigma must be >= 0");
  const double u = uniform_open(rng);
  return sigma * std::sqrt(-2.0 * std::log(u));
}

// Planar displacement with Rayleigh magnitude and uniform direction.
inline Vec2 sample_offset(double sigma, Rng& rng) {
  const double v = sample_misalignment(sigma, rng);
  const double phi = kTwoPi * uniform01(rng);
  return {v * std::cos(phi), v * std::sin(phi)};
}

// Log-irradiance variance with aperture averaging over the receiver lens.
inline double scintillation_variance(const TurbulenceParams& t, const BeamGeometry& g) {
  const double z = g.link_distance;
  if (!(z > 0.0)) throw DomainError("scintillation_variance: z must be > 0");
  const double k = g.wavenumber();
  const double chi2 = 1.23 * t.cn2 * std::pow(k, 7.0 / 6.0) * std::pow(z, 11.0 / 6.0);
  const double d2 = g.rx_lens_radius * g.rx_lens_radius * k / z;
  const double chi125 = std::pow(chi2, 6.0 / 5.0);
  const double t1 = 0.49 * chi2 / std::pow(1.0 + 0.18 * d2 + 0.56 * chi125, 7.0 / 6.0);
  const double t2 = 0.51 * chi2 / std::pow(1.0 + 0.9 * d2 + 0.62 * d2 * chi125, 5.0 / 6.0);
  return std::expm1(t1 + t2);
}

// Unit-mean lognormal fade.
inline double sample_turbulence_fade(double sigma2, Rng& rng) {
  if (!(sigma2 >= 0.0)) throw DomainError("sample_turbulence_fade: sigma^2 must be >= 0");
  const double x = standard_normal(rng);
  return std::exp(-0.5 * sigma2 + std::sqrt(sigma2) * x);
}

inline double atmospheric_attenuation(double db_per_m, double z) {
  if (!(db_per_m >= 0.0) || !(z >= 0.0)) throw DomainError("atmospheric_attenuation: negative input");
  return std::pow(10.0, -(db_per_m / 10.0) * z);
}

// ---------------------------------------------------------------------------
// SVD

struct SvdResult {
  Eigen::MatrixXcd u;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXcd v;
  std::vector<double> beta;  // squared non-zero singular values, descending
  int rank = 0;
};

inline SvdResult singular_transmittances(const Eigen::MatrixXcd& h, double rank_tol = 1e-12) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("singular_transmittances: SVD failed");
  SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV(), {}, 0};
  const auto& s = out.singular_values;
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rank_tol * s_max && s(i) > 0.0) {
      out.beta.push_back(s(i) * s(i));
      ++out.rank;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Physical channel source

struct ChannelOptions {
  GainModel gain = GainModel::captured_power;
  BeamPointing pointing = BeamPointing::aimed;
  double tail_sigmas = 12.0;  // misalignment range covered by the tables
  int samples_per_period = 64;
};

// Largest TX-RX centre distance a channel can meet: the widest pair plus
// `tail_sigmas` of misalignment and two waists of margin.
inline double required_offset_range(const BeamGeometry& g, const TurbulenceParams& t, const ChannelOptions& opt) {
  double base = 0.0;
  for (int i = 0; i < g.rx_count; ++i) {
    for (int j = 0; j < g.tx_count; ++j) {
      base = std::max(base, (g.rx_positions[static_cast<std::size_t>(i)] - beam_centre(g, j, opt.pointing)).norm());
    }
  }
  return base + opt.tail_sigmas * misalignment_sigma(t, g) + 2.0 * g.waist;
}

class PhysicalChannel {
 public:
  // `reuse` is adopted when it was built for the same geometry and covers
  // the required offset range; otherwise fresh tables are computed.
  PhysicalChannel(BeamGeometry g, TurbulenceParams t, ChannelOptions opt = {},
                  std::shared_ptr<const BeamPropagator> reuse = nullptr)
      : geom_(std::move(g)), turb_(t), opt_(opt) {
    geom_.validate();
    turb_.validate();
    sigma_r_ = fsoqkd::misalignment_sigma(turb_, geom_);
    sigma2_ = fsoqkd::scintillation_variance(turb_, geom_);
    t_a_ = fsoqkd::atmospheric_attenuation(turb_.attenuation_db_per_m, geom_.link_distance);
    d_max_ = required_offset_range(geom_, turb_, opt_);
    if (reuse && reuse->geometry() == geom_ && reuse->d_max() >= d_max_ &&
        reuse->samples_per_period() == opt_.samples_per_period) {
      prop_ = std::move(reuse);
      d_max_ = prop_->d_max();
    } else {
      prop_ = std::make_shared<BeamPropagator>(geom_, d_max_, opt_.samples_per_period);
    }
  }

  // Offset range a propagator must cover for this channel.
  double required_d_max() const { return d_max_; }
  std::shared_ptr<const BeamPropagator> shared_propagator() const { return prop_; }

  const BeamGeometry& geometry() const { return geom_; }
  const TurbulenceParams& turbulence() const { return turb_; }
  const BeamPropagator& propagator() const { return *prop_; }
  double misalignment_sigma() const { return sigma_r_; }
  double scintillation_variance() const { return sigma2_; }
  double atmospheric_attenuation() const { return t_a_; }
  std::size_t subchannel_count() const {
    return static_cast<std::size_t>(std::min(geom_.tx_count, geom_.rx_count));
  }

  Eigen::MatrixXcd gain_matrix(Vec2 misalignment) const {
    Eigen::MatrixXcd h(geom_.rx_count, geom_.tx_count);
    for (int i = 0; i < geom_.rx_count; ++i) {
      for (int j = 0; j < geom_.tx_count; ++j) {
        const double d = (geom_.rx_positions[static_cast<std::size_t>(i)] -
                          (beam_centre(geom_, j, opt_.pointing) + misalignment)).norm();
        if (d > d_max_) throw NumericalError("gain_matrix: misalignment beyond tabulated range", d);
        h(i, j) = prop_->gain(d, opt_.gain);
      }
    }
    return h;
  }

  // Draw order per realisation: offset magnitude, offset angle, then one fade
  // per potential sub-channel. The count is fixed so that streams stay aligned
  // across configurations.
  ChannelRealization realize(Rng& rng) const {
    ChannelRealization out;
    out.misalignment = sample_offset(sigma_r_, rng);
    const std::size_t m = subchannel_count();
    out.fades.resize(m);
    for (auto& f : out.fades) f = sample_turbulence_fade(sigma2_, rng);
    out.gain_matrix = gain_matrix(out.misalignment);
    const auto svd = singular_transmittances(out.gain_matrix);
    out.singular_transmittances = svd.beta;
    out.rank = svd.rank;
    out.atmospheric_attenuation = t_a_;
    out.effective_T.assign(m, 0.0);
    for (int i = 0; i < svd.rank && static_cast<std::size_t>(i) < m; ++i) {
      double t = turb_.detector_efficiency * t_a_ * out.fades[static_cast<std::size_t>(i)] *
                 svd.beta[static_cast<std::size_t>(i)];
      if (t > 1.0) {
        t = 1.0;
        ++out.clamp_count;
      }
      out.effective_T[static_cast<std::size_t>(i)] = std::max(t, 0.0);
    }
    return out;
  }

 private:
  BeamGeometry geom_;
  TurbulenceParams turb_;
  ChannelOptions opt_;
  double sigma_r_ = 0.0;
  double sigma2_ = 0.0;
  double t_a_ = 1.0;
  double d_max_ = 0.0;
  std::shared_ptr<const BeamPropagator> prop_;
};

inline ChannelRealization realize_channel(const PhysicalChannel& channel, Rng& rng) {
  return channel.realize(rng);
}

}  // namespace fsoqkd
