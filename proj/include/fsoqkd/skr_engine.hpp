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
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <tuple>
#include <string>
#include <thread>
#include <vector>

#include "fsoqkd/channel_model.hpp"
#include "fsoqkd/eavesdropper.hpp"
#include "fsoqkd/errors.hpp"
#include "fsoqkd/info_bounds.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/quantum_noise.hpp"

namespace fsoqkd {

struct SkrOptions {
  double tail_tol = kDefaultTailTol;
  VarianceConvention convention = VarianceConvention::printed;
};

struct SkrTerms {
  double skr = 0.0;     // beta * mi - holevo
  double mi = 0.0;      // mutual-information bound
  double holevo = 0.0;
};

// Per-sub-channel key rate with the Poisson table computed once.
class SkrEvaluator {
 public:
  SkrEvaluator(ProtocolParams p, HybridNoiseParams hn, SkrOptions opt = {})
      : p_(p), hn_(hn), opt_(opt), pw_(poisson_table(hn.poisson_mean, opt.tail_tol)) {
    p_.validate();
    hn_.validate();
  }

  SkrTerms terms(Protocol protocol, double t) const {
    SkrTerms out;
    out.mi = mi_bound(protocol, t, p_, hn_, pw_, opt_.convention).value;
    out.holevo = holevo(protocol, t, p_, hn_);
    out.skr = p_.reconciliation * out.mi - out.holevo;
    return out;
  }

  const ProtocolParams& protocol_params() const { return p_; }
  const HybridNoiseParams& noise_params() const { return hn_; }
  const SkrOptions& options() const { return opt_; }
  const PoissonWeights& weights() const { return pw_; }

 private:
  ProtocolParams p_;
  HybridNoiseParams hn_;
  SkrOptions opt_;
  PoissonWeights pw_;
};

// Negative values are returned as they are.
inline double skr_instant(Protocol protocol, double t, const ProtocolParams& p, const HybridNoiseParams& hn,
                          SkrOptions opt = {}) {
  return SkrEvaluator(p, hn, opt).terms(protocol, t).skr;
}

// ---------------------------------------------------------------------------
// Synthetic channel source: r identical sub-channels with a fixed
// transmissivity and optional unit-mean lognormal fading.

class FixedChannel {
 public:
  FixedChannel(std::size_t subchannels, double transmissivity, double fading_variance = 0.0)
      : m_(subchannels), t_(transmissivity), s2_(fading_variance) {
    if (m_ < 1) throw ConfigError("fixed channel needs at least one sub-channel");
    if (!(t_ >= 0.0 && t_ <= 1.0)) throw ConfigError("fixed transmissivity must lie in [0, 1]");
    if (!(s2_ >= 0.0)) throw ConfigError("fading variance must be >= 0");
  }

  std::size_t subchannel_count() const { return m_; }

  ChannelRealization realize(Rng& rng) const {
    ChannelRealization out;
    out.fades.resize(m_);
    for (auto& f : out.fades) f = sample_turbulence_fade(s2_, rng);
    out.rank = static_cast<int>(m_);
    out.gain_matrix = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_)) *
                      std::sqrt(t_);
    out.singular_transmittances.assign(m_, t_);
    out.effective_T.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double t = t_ * out.fades[i];
      if (t > 1.0) {
        t = 1.0;
        ++out.clamp_count;
      }
      out.effective_T[i] = t;
    }
    return out;
  }

 private:
  std::size_t m_;
  double t_;
  double s2_;
};

// ---------------------------------------------------------------------------
// Monte Carlo expectation over channel realisations

struct MonteCarloOptions {
  std::size_t realizations = 20000;
  std::size_t batches = 20;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct SubchannelStats {
  double skr = 0.0;          // mean
  double skr_se = 0.0;       // batch-means standard error
  double skr_clamped = 0.0;  // mean of max(skr, 0)
  double mi = 0.0;
  double holevo = 0.0;
  double mean_T = 0.0;
};

struct SkrResult {
  Protocol protocol = Protocol::one_way;
  std::vector<SubchannelStats> per_subchannel;
  double total = 0.0;
  double total_se = 0.0;
  double total_clamped = 0.0;
  double total_clamped_se = 0.0;
  double mi = 0.0;       // summed over sub-channels
  double holevo = 0.0;
  double mean_T = 0.0;   // averaged over sub-channels
  std::size_t samples = 0;
  std::size_t clamp_count = 0;
  std::size_t degenerate_count = 0;  // (realisation, sub-channel) pairs with no transmission
  bool all_degenerate = false;
  std::string fingerprint;
};

namespace detail {

// Mean and batch-means standard error, summed in index order.
inline std::pair<double, double> batch_mean(const std::vector<double>& x, std::size_t batches) {
  const std::size_t n = x.size();
  KahanSum total;
  for (double v : x) total.add(v);
  const double mean = total.value() / static_cast<double>(n);
  const std::size_t b = std::min(batches, n);
  if (b < 2) return {mean, 0.0};
  std::vector<double> means(b);
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t lo = k * n / b, hi = (k + 1) * n / b;
    KahanSum s;
    for (std::size_t i = lo; i < hi; ++i) s.add(x[i]);
    means[k] = s.value() / static_cast<double>(hi - lo);
  }
  KahanSum ss;
  for (double m : means) ss.add((m - mean) * (m - mean));
  return {mean, std::sqrt(ss.value() / static_cast<double>(b - 1) / static_cast<double>(b))};
}

inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (t == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (unsigned k = 0; k < t; ++k) {
    const std::size_t lo = k * n / t, hi = (k + 1) * n / t;
    pool.emplace_back([&, k, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Both protocols from the same channel realisations. Realisation r always
// draws from substream (seed, r), and all reductions run in index order, so
// results do not depend on the thread count.
template <class Source>
std::array<SkrResult, 2> skr_mimo_pair(const Source& source, const SkrEvaluator& eval,
                                       const MonteCarloOptions& mc) {
  if (mc.realizations < 1) throw DomainError("skr_mimo: need at least one realisation");
  const std::size_t n = mc.realizations;
  const std::size_t m = source.subchannel_count();
  // [protocol][quantity][r * m + i]
  std::array<std::array<std::vector<double>, 3>, 2> v;
  for (auto& pr : v) {
    for (auto& q : pr) q.assign(n * m, 0.0);
  }
  std::vector<double> tvals(n * m, 0.0);
  std::vector<unsigned char> active(n * m, 0);
  std::vector<int> clamps(n, 0);

  detail::parallel_for(n, mc.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      Rng rng = make_substream(mc.seed, r);
      const ChannelRealization real = source.realize(rng);
      clamps[r] = real.clamp_count;
      for (std::size_t i = 0; i < m; ++i) {
        const double t = i < real.effective_T.size() ? real.effective_T[i] : 0.0;
        const std::size_t idx = r * m + i;
        tvals[idx] = t;
        if (static_cast<int>(i) >= real.rank || !(t > 0.0)) continue;
        active[idx] = 1;
        for (int p = 0; p < 2; ++p) {
          const auto terms = eval.terms(p == 0 ? Protocol::one_way : Protocol::two_way, t);
          v[p][0][idx] = terms.skr;
          v[p][1][idx] = terms.mi;
          v[p][2][idx] = terms.holevo;
        }
      }
    }
  });

  std::array<SkrResult, 2> out;
  std::size_t degenerate = 0, clamp_total = 0;
  bool any_active = false;
  for (std::size_t idx = 0; idx < n * m; ++idx) {
    if (!active[idx]) ++degenerate;
    any_active = any_active || active[idx];
  }
  for (int c : clamps) clamp_total += static_cast<std::size_t>(c);

  std::vector<double> col(n), tot(n), tot_c(n);
  for (int p = 0; p < 2; ++p) {
    SkrResult& res = out[static_cast<std::size_t>(p)];
    res.protocol = p == 0 ? Protocol::one_way : Protocol::two_way;
    res.samples = n;
    res.clamp_count = clamp_total;
    res.degenerate_count = degenerate;
    res.all_degenerate = !any_active;
    res.per_subchannel.resize(m);
    std::fill(tot.begin(), tot.end(), 0.0);
    std::fill(tot_c.begin(), tot_c.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      SubchannelStats& st = res.per_subchannel[i];
      for (std::size_t r = 0; r < n; ++r) col[r] = v[p][0][r * m + i];
      std::tie(st.skr, st.skr_se) = detail::batch_mean(col, mc.batches);
      for (std::size_t r = 0; r < n; ++r) {
        tot[r] += col[r];
        col[r] = std::max(col[r], 0.0);
        tot_c[r] += col[r];
      }
      st.skr_clamped = detail::batch_mean(col, mc.batches).first;
      for (std::size_t r = 0; r < n; ++r) col[r] = v[p][1][r * m + i];
      st.mi = detail::batch_mean(col, mc.batches).first;
      for (std::size_t r = 0; r < n; ++r) col[r] = v[p][2][r * m + i];
      st.holevo = detail::batch_mean(col, mc.batches).first;
      for (std::size_t r = 0; r < n; ++r) col[r] = tvals[r * m + i];
      st.mean_T = detail::batch_mean(col, mc.batches).first;
    }
    // The total is the exact sum of the per-sub-channel means; only its
    // standard error comes from the per-realisation totals.
    KahanSum total, total_c, mi, chi, mt;
    for (const auto& st : res.per_subchannel) {
      total.add(st.skr);
      total_c.add(st.skr_clamped);
      mi.add(st.mi);
      chi.add(st.holevo);
      mt.add(st.mean_T);
    }
    res.total = total.value();
    res.total_clamped = total_c.value();
    res.mi = mi.value();
    res.holevo = chi.value();
    res.mean_T = mt.value() / static_cast<double>(m);
    res.total_se = detail::batch_mean(tot, mc.batches).second;
    res.total_clamped_se = detail::batch_mean(tot_c, mc.batches).second;
  }
  return out;
}

template <class Source>
SkrResult skr_mimo(Protocol protocol, const Source& source, const SkrEvaluator& eval, const MonteCarloOptions& mc) {
  auto pair = skr_mimo_pair(source, eval, mc);
  return pair[protocol == Protocol::one_way ? 0 : 1];
}

// ---------------------------------------------------------------------------
// High-modulation asymptotics

struct AsymptoticReport {
  Protocol protocol = Protocol::one_way;
  double transmissivity = 0.0;
  double mi = 0.0;
  double holevo = 0.0;
  double skr = 0.0;
  // One-way: lambda_1 .. lambda_4.
  // Two-way: lambda_1, lambda_2, lambda_3*lambda_4, lambda_5, lambda_6,
  //          lambda_7*lambda_8.
  std::vector<double> eigen_terms;
  double delta_skr = 0.0;          // full differential expression
  double delta_skr_small_t = 0.0;  // small-T simplification
  bool low_vs_over_vacuum = false; // V_s / V_0 < 1e3
  bool low_vs_over_eve = false;    // V_s / nu < 1e3
  bool low_vs_over_gauss = false;  // V_s / sigma_g^2 < 1e3
  bool delta_assumption_violated = false;  // nu != 1 or V_0 not close to nu
};

struct DeltaSkr {
  double full = 0.0;
  double small_t = 0.0;
  bool assumption_violated = false;
};

// Two-way minus one-way asymptotic key rate for nu = 1, V_0 ~ nu, and its
// small-T simplification 0.5*log2(1 + T^2 V_0).
inline DeltaSkr delta_skr(double t, const ProtocolParams& p, const HybridNoiseParams& hn,
                          const PoissonWeights& pw) {
  detail::require_transmissivity(t);
  DeltaSkr d;
  const double sg = hn.gaussian_variance, v0 = p.vacuum_variance;
  const double s1 = 1.0 - t + sg;
  const double s2 = 1.0 + (1.0 + t) * sg;
  const std::size_t n = pw.w.size();
  auto log_inner = [&](std::size_t k, double s) {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> tt(n);
    for (std::size_t l = 0; l < n; ++l) {
      const double dk = static_cast<double>(k) - static_cast<double>(l);
      tt[l] = pw.log_w[l] - dk * dk / (4.0 * s);
      m = std::max(m, tt[l]);
    }
    double acc = 0.0;
    for (double x : tt) acc += std::exp(x - m);
    return m + std::log(acc);
  };
  KahanSum sum;
  for (std::size_t k = 0; k < n; ++k) {
    const double ln_ratio = std::log(s1) + log_inner(k, s2) - std::log(s2) - log_inner(k, s1);
    sum.add(pw.w[k] * ln_ratio / std::numbers::ln2);
  }
  d.small_t = 0.5 * std::log2(1.0 + t * t * v0);
  d.full = sum.value() + d.small_t;
  d.assumption_violated = p.eve_variance != 1.0 || std::abs(v0 - p.eve_variance) > 1e-6 * p.eve_variance;
  return d;
}

inline DeltaSkr delta_skr(double t, const ProtocolParams& p, const HybridNoiseParams& hn,
                          double tail_tol = kDefaultTailTol) {
  return delta_skr(t, p, hn, poisson_table(hn.poisson_mean, tail_tol));
}

inline AsymptoticReport asymptotic_report(Protocol protocol, double t, const ProtocolParams& p,
                                          const HybridNoiseParams& hn, double tail_tol = kDefaultTailTol) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("asymptotic_report: T must lie in (0, 1)");
  const auto pw = poisson_table(hn.poisson_mean, tail_tol);
  const double vs = p.modulation_variance, v0 = p.vacuum_variance, nu = p.eve_variance;
  const double sg = hn.gaussian_variance;
  AsymptoticReport r;
  r.protocol = protocol;
  r.transmissivity = t;
  if (protocol == Protocol::one_way) {
    r.mi = entropy_upper(t * t * vs, pw) - entropy_lower((1.0 - t * t) * nu + sg, pw);
    r.eigen_terms = {nu, (1.0 - t) * vs, nu, std::sqrt((1.0 - t) * vs * nu / t)};
    r.holevo = 0.5 * std::log2(t * (1.0 - t) * vs / nu);
  } else {
    const double noise = t * t * v0 + (1.0 - t * t) * nu + (1.0 + t) * sg;
    r.mi = entropy_upper(t * vs, pw) - entropy_lower(noise, pw);
    const double g = (1.0 - t) * t * t * v0 + (1.0 + t * t * t) * nu;
    const double l6 = std::sqrt(((1.0 + t * t * t) * nu + (1.0 - t) * t * t * v0 * nu * nu) / g);
    const double l78 = std::sqrt(vs * vs * vs * std::pow(1.0 - t, 3) * g / t);
    r.eigen_terms = {nu, nu, (1.0 - t) * (1.0 - t) * vs * vs, nu, l6, l78};
    r.holevo = 0.5 * std::log2(t * (1.0 - t) * vs / (t * t * v0 + nu + t * t * t * (nu - v0))) +
               von_neumann_h(nu) - von_neumann_h(l6);
  }
  r.skr = p.reconciliation * r.mi - r.holevo;
  const auto d = delta_skr(t, p, hn, pw);
  r.delta_skr = d.full;
  r.delta_skr_small_t = d.small_t;
  r.delta_assumption_violated = d.assumption_violated;
  r.low_vs_over_vacuum = vs / v0 < 1e3;
  r.low_vs_over_eve = vs / nu < 1e3;
  r.low_vs_over_gauss = vs / sg < 1e3;
  return r;
}

}  // namespace fsoqkd
