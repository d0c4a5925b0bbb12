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
#include <limits>
#include <numbers>
#include <vector>

#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/quadrature.hpp"
#include "fsoqkd/quantum_noise.hpp"

namespace fsoqkd {

// All information quantities are in bits.

struct EntropyBoundPair {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t truncation = 0;  // K
  double tail_mass = 0.0;
};

// Upper bound on the differential entropy of a Poisson-weighted Gaussian
// mixture: discrete Poisson entropy plus the Gaussian entropy.
inline double entropy_upper(double shared_variance, const PoissonWeights& pw) {
  if (!(shared_variance > 0.0)) throw DomainError("entropy_upper: variance must be > 0");
  const double gauss = 0.5 * std::log2(kTwoPi * std::numbers::e * shared_variance);
  KahanSum s;
  for (std::size_t k = 0; k < pw.w.size(); ++k) {
    s.add(pw.w[k] * (-pw.log_w[k] / std::numbers::ln2 + gauss));
  }
  return s.value();
}

// Lower bound: -sum_k w_k log2 sum_l w_l N(k; l, 2 sigma^2). The inner sum is
// evaluated as a log-sum-exp so that tiny variances do not underflow.
inline double entropy_lower(double shared_variance, const PoissonWeights& pw) {
  if (!(shared_variance > 0.0)) throw DomainError("entropy_lower: variance must be > 0");
  const std::size_t n = pw.w.size();
  const double log_norm = -0.5 * std::log(4.0 * kPi * shared_variance);
  std::vector<double> t(n);
  KahanSum s;
  for (std::size_t k = 0; k < n; ++k) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) {
      const double d = static_cast<double>(k) - static_cast<double>(l);
      t[l] = pw.log_w[l] - d * d / (4.0 * shared_variance);
      m = std::max(m, t[l]);
    }
    double inner = 0.0;
    for (std::size_t l = 0; l < n; ++l) inner += std::exp(t[l] - m);
    s.add(-pw.w[k] * (m + std::log(inner) + log_norm) / std::numbers::ln2);
  }
  return s.value();
}

inline double entropy_upper(double shared_variance, double lambda0, double tail_tol = kDefaultTailTol) {
  return entropy_upper(shared_variance, poisson_table(lambda0, tail_tol));
}

inline double entropy_lower(double shared_variance, double lambda0, double tail_tol = kDefaultTailTol) {
  return entropy_lower(shared_variance, poisson_table(lambda0, tail_tol));
}

inline EntropyBoundPair entropy_bounds(double shared_variance, double lambda0,
                                       double tail_tol = kDefaultTailTol) {
  const auto pw = poisson_table(lambda0, tail_tol);
  return {entropy_lower(shared_variance, pw), entropy_upper(shared_variance, pw), pw.truncation(), pw.tail};
}

// Which variance expressions feed the mutual-information bound.
//   printed: the bound expressions as printed (T^2 on V_a in the one-way
//            received variance, no vacuum term in the one-way noise).
//   density: the shared variances of the noise and received-signal
//            densities.
enum class VarianceConvention { printed, density };

inline const char* to_string(VarianceConvention c) {
  return c == VarianceConvention::printed ? "printed" : "density";
}

struct MiBound {
  double value = 0.0;             // h_U(received) - h_L(noise)
  double received_variance = 0.0;
  double noise_variance = 0.0;
  VarianceConvention convention = VarianceConvention::printed;
};

inline MiBound mi_bound(Protocol protocol, double t, const ProtocolParams& p, const HybridNoiseParams& hn,
                        const PoissonWeights& pw, VarianceConvention conv = VarianceConvention::printed) {
  detail::require_transmissivity(t);
  MiBound out;
  out.convention = conv;
  if (conv == VarianceConvention::density) {
    out.received_variance = received_signal_variance(protocol, t, p, hn);
    out.noise_variance = effective_noise_variance(protocol, t, p, hn);
  } else {
    const double va = p.composite_variance(), v0 = p.vacuum_variance, nu = p.eve_variance;
    const double sg = hn.gaussian_variance;
    if (protocol == Protocol::one_way) {
      out.received_variance = t * t * va + (1.0 - t * t) * nu + sg;
      out.noise_variance = (1.0 - t * t) * nu + sg;
    } else {
      out.noise_variance = t * t * v0 + (1.0 - t * t) * nu + (1.0 + t) * sg;
      out.received_variance = t * va + out.noise_variance;
    }
  }
  out.value = entropy_upper(out.received_variance, pw) - entropy_lower(out.noise_variance, pw);
  return out;
}

inline MiBound mi_bound(Protocol protocol, double t, const ProtocolParams& p, const HybridNoiseParams& hn,
                        double tail_tol = kDefaultTailTol,
                        VarianceConvention conv = VarianceConvention::printed) {
  return mi_bound(protocol, t, p, hn, poisson_table(hn.poisson_mean, tail_tol), conv);
}

// -int p log2 p over the mixture support, split at the component means.
inline QuadratureResult<double> entropy_oracle_detailed(const MixturePdf& pdf, Tolerance tol = {1e-7, 1e-12}) {
  if (pdf.weights.empty() || !(pdf.variance > 0.0)) throw DomainError("entropy_oracle: empty mixture");
  const double sd = std::sqrt(pdf.variance);
  const auto [lo_it, hi_it] = std::minmax_element(pdf.means.begin(), pdf.means.end());
  const double lo = *lo_it - 12.0 * sd, hi = *hi_it + 12.0 * sd;
  std::vector<double> bp{lo, hi};
  for (double m : pdf.means) {
    bp.push_back(m);
    bp.push_back(m + 0.5);
    for (double k : {-6.0, -3.0, 3.0, 6.0}) bp.push_back(m + k * sd);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::remove_if(bp.begin(), bp.end(), [&](double x) { return x < lo || x > hi; }), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  std::vector<double> log_w(pdf.weights.size());
  for (std::size_t k = 0; k < log_w.size(); ++k) log_w[k] = std::log(pdf.weights[k]);
  const double log_norm = -0.5 * std::log(kTwoPi * pdf.variance);
  auto f = [&](double x) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < log_w.size(); ++k) {
      const double d = x - pdf.means[k];
      m = std::max(m, log_w[k] - d * d / (2.0 * pdf.variance));
    }
    double s = 0.0;
    for (std::size_t k = 0; k < log_w.size(); ++k) {
      const double d = x - pdf.means[k];
      s += std::exp(log_w[k] - d * d / (2.0 * pdf.variance) - m);
    }
    const double lp = m + std::log(s) + log_norm;
    return -std::exp(lp) * lp / std::numbers::ln2;
  };
  return integrate(f, std::span<const double>(bp), tol, 200000);
}

inline double entropy_oracle(const MixturePdf& pdf, Tolerance tol = {1e-7, 1e-12}) {
  return entropy_oracle_detailed(pdf, tol).value;
}

// True mutual information of b = sqrt(T) a + n with Gaussian a and mixture
// noise n: h(b) - h(n), both mixtures sharing the Poisson weights, with the
// density variances.
inline double mi_oracle(Protocol protocol, double t, const ProtocolParams& p, const HybridNoiseParams& hn,
                        double tail_tol = kDefaultTailTol, Tolerance tol = {1e-9, 1e-12}) {
  const auto b = received_signal_params(protocol, t, p, hn, tail_tol);
  const auto n = effective_noise_params(protocol, t, p, hn, tail_tol);
  return entropy_oracle(b, tol) - entropy_oracle(n, tol);
}

}  // namespace fsoqkd
