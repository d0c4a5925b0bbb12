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
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"

namespace fsoqkd {

enum class Protocol { one_way, two_way };

inline const char* to_string(Protocol p) { return p == Protocol::one_way ? "one_way" : "two_way"; }

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr std::size_t kPoissonCap = 4096;

struct HybridNoiseParams {
  double poisson_mean = 1.0;         // lambda_0
  double gaussian_mean = 0.0;        // mu_g
  double gaussian_variance = 0.001;  // sigma_g^2

  void validate() const {
    if (!(poisson_mean >= 0.0) || !std::isfinite(poisson_mean)) throw ConfigError("poisson mean must be ≥ 0");
    if (!(gaussian_variance > 0.0)) throw ConfigError("gaussian variance must be > 0");
    if (!std::isfinite(gaussian_mean)) throw ConfigError("gaussian mean must be finite");
  }
};

// Vacuum (shot-noise) variance 2n+1 of a thermal mode at temperature t0.
inline double thermal_vacuum_variance(double wavelength = 1550e-9, double t0 = 296.0) {
  constexpr double h = 6.63e-34, kb = 1.38e-23, c = 3e8;
  const double nbar = 1.0 / std::expm1(h * (c / wavelength) / (kb * t0));
  return 2.0 * nbar + 1.0;
}

struct ProtocolParams {
  double modulation_variance = 1e3;  // V_s
  double vacuum_variance = thermal_vacuum_variance();  // V_0
  double eve_variance = 1.0;         // nu
  double reconciliation = 1.0;       // beta

  double composite_variance() const { return modulation_variance + vacuum_variance; }  // V_a

  void validate() const {
    if (!(modulation_variance > 0.0)) throw ConfigError("modulation variance must be > 0");
    if (!(vacuum_variance >= 1.0)) throw ConfigError("vacuum variance must be ≥ 1");
    if (!(eve_variance >= 1.0)) throw ConfigError("Eve variance must be ≥ 1");
    if (!(reconciliation >= 0.0 && reconciliation <= 1.0)) throw ConfigError("reconciliation efficiency must lie in [0, 1]");
  }
};

// Truncated Poisson weights. `tail` is the excluded mass beyond the last
// index.
struct PoissonWeights {
  std::vector<double> w;
  std::vector<double> log_w;
  double tail = 0.0;
  double lambda = 0.0;

  std::size_t truncation() const { return w.size() - 1; }  // K
};

inline PoissonWeights poisson_table(double lambda0, double tail_tol = kDefaultTailTol) {
  if (!(lambda0 >= 0.0)) throw DomainError("poisson_weights: lambda0 must be >= 0");
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("poisson_weights: tail_tol must lie in (0, 1)");
  PoissonWeights out;
  out.lambda = lambda0;
  if (lambda0 == 0.0) {
    out.w = {1.0};
    out.log_w = {0.0};
    return out;
  }
  const double log_l = std::log(lambda0);
  for (std::size_t k = 0;; ++k) {
    if (k > kPoissonCap) throw ConfigError("poisson_weights: truncation exceeds the cap of 4096 terms");
    const double lw = -lambda0 + static_cast<double>(k) * log_l - std::lgamma(static_cast<double>(k) + 1.0);
    out.log_w.push_back(lw);
    out.w.push_back(std::exp(lw));
    // P(X > k) is the regularised lower incomplete gamma P(k + 1, lambda).
    const double tail = boost::math::gamma_p(static_cast<double>(k) + 1.0, lambda0);
    if (tail < tail_tol) {
      out.tail = tail;
      break;
    }
  }
  return out;
}

inline std::vector<double> poisson_weights(double lambda0, double tail_tol = kDefaultTailTol) {
  return poisson_table(lambda0, tail_tol).w;
}

// Poisson-weighted mixture of Gaussians with a shared variance; component k
// sits at k + shift.
struct MixturePdf {
  std::vector<double> weights;
  std::vector<double> means;
  double variance = 1.0;
  double tail_mass = 0.0;

  double operator()(double x) const {
    KahanSum s;
    const double norm = 1.0 / std::sqrt(kTwoPi * variance);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double d = x - means[k];
      s.add(weights[k] * norm * std::exp(-d * d / (2.0 * variance)));
    }
    return s.value();
  }

  // log of the density, stable where the density underflows.
  double log_density(double x) const {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> t(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double d = x - means[k];
      t[k] = std::log(weights[k]) - d * d / (2.0 * variance);
      m = std::max(m, t[k]);
    }
    double s = 0.0;
    for (double v : t) s += std::exp(v - m);
    return m + std::log(s) - 0.5 * std::log(kTwoPi * variance);
  }

  double mean() const {
    double m = 0.0, wsum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      m += weights[k] * means[k];
      wsum += weights[k];
    }
    return m / wsum;
  }

  // Shared variance plus the spread of the component means.
  double total_variance() const {
    const double mu = mean();
    double v = 0.0, wsum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      v += weights[k] * (means[k] - mu) * (means[k] - mu);
      wsum += weights[k];
    }
    return variance + v / wsum;
  }
};

inline MixturePdf make_mixture(const PoissonWeights& pw, double shift, double variance) {
  if (!(variance > 0.0)) throw DomainError("mixture variance must be > 0");
  MixturePdf m;
  m.weights = pw.w;
  m.means.resize(pw.w.size());
  for (std::size_t k = 0; k < pw.w.size(); ++k) m.means[k] = static_cast<double>(k) + shift;
  m.variance = variance;
  m.tail_mass = pw.tail;
  return m;
}

inline double hybrid_noise_pdf(double n, const HybridNoiseParams& hn, double tail_tol = kDefaultTailTol) {
  return make_mixture(poisson_table(hn.poisson_mean, tail_tol), hn.gaussian_mean, hn.gaussian_variance)(n);
}

namespace detail {
inline void require_transmissivity(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("transmissivity must lie in [0, 1]");
}
}  // namespace detail

// Shared variance of the effective noise density.
inline double effective_noise_variance(Protocol protocol, double t, const ProtocolParams& p,
                                       const HybridNoiseParams& hn) {
  detail::require_transmissivity(t);
  const double v0 = p.vacuum_variance, nu = p.eve_variance, sg = hn.gaussian_variance;
  if (protocol == Protocol::one_way) return t * v0 + (1.0 - t) * nu + sg;
  return (t + t * t) * v0 + (1.0 - t * t) * nu + (1.0 + t * t) * sg;
}

// Shared variance of the received-signal density.
inline double received_signal_variance(Protocol protocol, double t, const ProtocolParams& p,
                                       const HybridNoiseParams& hn) {
  detail::require_transmissivity(t);
  const double va = p.composite_variance(), v0 = p.vacuum_variance, nu = p.eve_variance;
  const double sg = hn.gaussian_variance;
  if (protocol == Protocol::one_way) return t * va + (1.0 - t) * nu + sg;
  return t * va + t * t * v0 + (1.0 - t * t) * nu + (1.0 + t * t) * sg;
}

inline double mixture_shift(Protocol protocol, double t, const HybridNoiseParams& hn) {
  return protocol == Protocol::one_way ? hn.gaussian_mean : (1.0 + std::sqrt(t)) * hn.gaussian_mean;
}

inline MixturePdf effective_noise_params(Protocol protocol, double t, const ProtocolParams& p,
                                         const HybridNoiseParams& hn, double tail_tol = kDefaultTailTol) {
  const double v = effective_noise_variance(protocol, t, p, hn);
  return make_mixture(poisson_table(hn.poisson_mean, tail_tol), mixture_shift(protocol, t, hn), v);
}

inline MixturePdf received_signal_params(Protocol protocol, double t, const ProtocolParams& p,
                                         const HybridNoiseParams& hn, double tail_tol = kDefaultTailTol) {
  const double v = received_signal_variance(protocol, t, p, hn);
  return make_mixture(poisson_table(hn.poisson_mean, tail_tol), mixture_shift(protocol, t, hn), v);
}

// q-quadrature samples of one protocol run. For the one-way protocol the
// second-pass Eve vectors are empty.
struct QuadratureSamples {
  std::vector<double> a;          // Alice's modulation
  std::vector<double> b;          // Bob's variable
  std::vector<double> eve_out;    // Eve's beam-splitter output (first pass)
  std::vector<double> eve_mem;    // retained EPR mode (first pass)
  std::vector<double> eve_out2;   // second pass (two-way)
  std::vector<double> eve_mem2;
};

namespace detail {

inline double hybrid_noise_draw(const HybridNoiseParams& hn, Rng& rng) {
  double k = 0.0;
  if (hn.poisson_mean > 0.0) {
    std::poisson_distribution<long long> pd(hn.poisson_mean);
    k = static_cast<double>(pd(rng));
  }
  return k + hn.gaussian_mean + std::sqrt(hn.gaussian_variance) * standard_normal(rng);
}

}  // namespace detail

// Draws the beam-splitter channel relations trial by trial. Vacuum terms a0
// and b0 are drawn with variance V_0; Eve's EPR pair has per-mode variance nu
// and q-correlation sqrt(nu^2 - 1).
inline QuadratureSamples simulate_quadratures(Protocol protocol, double t, const ProtocolParams& p,
                                              const HybridNoiseParams& hn, std::size_t n_trials,
                                              Rng& rng) {
  detail::require_transmissivity(t);
  if (n_trials < 1) throw DomainError("simulate_quadratures: n_trials must be >= 1");
  const double sv = std::sqrt(p.modulation_variance), s0 = std::sqrt(p.vacuum_variance);
  const double nu = p.eve_variance;
  const double st = std::sqrt(t), sr = std::sqrt(1.0 - t);
  auto epr = [&](double& e_in, double& e_q) {
    const double z1 = standard_normal(rng), z2 = standard_normal(rng);
    e_in = std::sqrt(nu) * z1;
    e_q = std::sqrt((nu * nu - 1.0) / nu) * z1 + std::sqrt(1.0 / nu) * z2;
  };
  QuadratureSamples s;
  s.a.resize(n_trials);
  s.b.resize(n_trials);
  s.eve_out.resize(n_trials);
  s.eve_mem.resize(n_trials);
  if (protocol == Protocol::two_way) {
    s.eve_out2.resize(n_trials);
    s.eve_mem2.resize(n_trials);
  }
  for (std::size_t n = 0; n < n_trials; ++n) {
    const double a = sv * standard_normal(rng);
    const double a0 = s0 * standard_normal(rng);
    double e_in, e_q;
    epr(e_in, e_q);
    s.a[n] = a;
    if (protocol == Protocol::one_way) {
      const double mode = a + a0;
      s.b[n] = st * mode + sr * e_in + detail::hybrid_noise_draw(hn, rng);
      s.eve_out[n] = -sr * mode + st * e_in;
      s.eve_mem[n] = e_q;
      continue;
    }
    // Bob -> Alice: Bob's thermal coherent state, modulation x plus vacuum b0.
    const double x = sv * standard_normal(rng);
    const double b0 = s0 * standard_normal(rng);
    const double b1 = x + b0;
    const double a1 = st * b1 + sr * e_in + detail::hybrid_noise_draw(hn, rng);
    s.eve_out[n] = -sr * b1 + st * e_in;
    s.eve_mem[n] = e_q;
    // Alice -> Bob: displaced mode, second independent attack and noise.
    const double a2 = a1 + a + a0;
    double e_in2, e_q2;
    epr(e_in2, e_q2);
    const double b2 = st * a2 + sr * e_in2 + detail::hybrid_noise_draw(hn, rng);
    s.eve_out2[n] = -sr * a2 + st * e_in2;
    s.eve_mem2[n] = e_q2;
    // Bob removes his own modulation.
    s.b[n] = b2 - t * x;
  }
  return s;
}

}  // namespace fsoqkd
