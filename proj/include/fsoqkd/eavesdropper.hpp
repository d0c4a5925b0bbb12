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
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/quantum_noise.hpp"

namespace fsoqkd {

// Real symmetric covariance matrix in (q1, p1, q2, p2, ...) ordering.
using CovarianceMatrix = Eigen::MatrixXd;

// Symplectic spectrum, descending.
using SymplecticSpectrum = std::vector<double>;

inline constexpr double kSymplecticClamp = 1e-9;

namespace detail {

inline Eigen::Matrix2d pauli_z() { return Eigen::Vector2d(1.0, -1.0).asDiagonal(); }
inline Eigen::Matrix2d id2() { return Eigen::Matrix2d::Identity(); }

inline void set_block(CovarianceMatrix& m, int r, int c, const Eigen::Matrix2d& b) {
  m.block<2, 2>(2 * r, 2 * c) = b;
}

inline void check_covariance(const CovarianceMatrix& s) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.rows() == 0) {
    throw DomainError("covariance matrix must be square with even dimension");
  }
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("covariance matrix must be symmetric");
  }
}

}  // namespace detail

// Symplectic form I_n (x) [[0, 1], [-1, 0]].
inline Eigen::MatrixXd symplectic_form(int modes) {
  Eigen::MatrixXd om = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    om(2 * j, 2 * j + 1) = 1.0;
    om(2 * j + 1, 2 * j) = -1.0;
  }
  return om;
}

inline CovarianceMatrix epr_covariance(double nu) {
  if (!(nu >= 1.0)) throw DomainError("epr_covariance: nu must be >= 1");
  const double c = std::sqrt(nu * nu - 1.0);
  CovarianceMatrix m(4, 4);
  detail::set_block(m, 0, 0, nu * detail::id2());
  detail::set_block(m, 1, 1, nu * detail::id2());
  detail::set_block(m, 0, 1, c * detail::pauli_z());
  detail::set_block(m, 1, 0, c * detail::pauli_z());
  return m;
}

// Moduli of the eigenvalues of j*Omega*Sigma, which come in +/- pairs; one
// value per pair is kept. Values within 1e-9 below 1 are set to 1.
inline SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix& s) {
  detail::check_covariance(s);
  const int n = static_cast<int>(s.rows() / 2);
  const Eigen::MatrixXcd m = Complex(0.0, 1.0) * (symplectic_form(n) * s).cast<Complex>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("symplectic_eigenvalues: eigen solver failed");
  std::vector<double> pos, neg;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()(i).real();
    (re >= 0.0 ? pos : neg).push_back(std::abs(re));
  }
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  // Zero eigenvalues can land on either side; rebalance before pairing.
  while (pos.size() > neg.size()) {
    auto it = std::min_element(pos.begin(), pos.end());
    neg.push_back(*it);
    pos.erase(it);
  }
  while (neg.size() > pos.size()) {
    auto it = std::min_element(neg.begin(), neg.end());
    pos.push_back(*it);
    neg.erase(it);
  }
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  SymplecticSpectrum out(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = pos[i], b = neg[i];
    if (std::abs(a - b) > 1e-9 * std::max(scale, std::max(a, 1.0))) {
      throw NumericalError("symplectic_eigenvalues: spectrum is not +/- paired", std::abs(a - b));
    }
    double v = 0.5 * (a + b);
    if (v < 1.0 && v >= 1.0 - kSymplecticClamp) v = 1.0;
    out[i] = v;
  }
  return out;
}

// Von Neumann entropy contribution of one symplectic eigenvalue.
inline double von_neumann_h(double lambda) {
  if (!(lambda >= 1.0 - kSymplecticClamp)) throw DomainError("von_neumann_h: eigenvalue below 1");
  if (lambda <= 1.0) return 0.0;
  const double p = 0.5 * (lambda + 1.0), m = 0.5 * (lambda - 1.0);
  return p * std::log2(p) - m * std::log2(m);
}

inline double von_neumann_entropy(const SymplecticSpectrum& s) {
  double h = 0.0;
  for (double l : s) h += von_neumann_h(l);
  return h;
}

// Cross-covariance between Eve's modes and Bob's variable, and Bob's
// variance.
struct ConditioningData {
  Eigen::MatrixXd cross;  // 2n x 2
  double bob_variance = 0.0;
  Eigen::Matrix2d projector = Eigen::Vector2d(1.0, 0.0).asDiagonal();
};

inline CovarianceMatrix eve_covariance(Protocol protocol, double t, const ProtocolParams& p,
                                       const HybridNoiseParams& hn) {
  detail::require_transmissivity(t);
  const double nu = p.eve_variance, va = p.composite_variance();
  if (!(nu >= 1.0)) throw DomainError("eve_covariance: nu must be >= 1");
  const auto I = detail::id2();
  const auto Z = detail::pauli_z();
  const double c = std::sqrt(t * (nu * nu - 1.0));
  if (protocol == Protocol::one_way) {
    CovarianceMatrix m(4, 4);
    detail::set_block(m, 0, 0, (t * nu + (1.0 - t) * va) * I);
    detail::set_block(m, 0, 1, c * Z);
    detail::set_block(m, 1, 0, c * Z);
    detail::set_block(m, 1, 1, nu * I);
    return m;
  }
  const double s11 = (1.0 - t) * va + t * nu;
  const double s21 = std::sqrt(t) * (1.0 - t) * (va - nu);
  const double cb = -(1.0 - t) * std::sqrt(nu * nu - 1.0);
  const double s22 = (1.0 - t * t) * va + (1.0 - t + t * t) * nu +
                     (1.0 - t) * (hn.poisson_mean + hn.gaussian_variance);
  CovarianceMatrix m = CovarianceMatrix::Zero(8, 8);
  detail::set_block(m, 0, 0, s11 * I);
  detail::set_block(m, 0, 1, c * Z);
  detail::set_block(m, 0, 2, s21 * I);
  detail::set_block(m, 1, 0, c * Z);
  detail::set_block(m, 1, 1, nu * I);
  detail::set_block(m, 1, 2, cb * Z);
  detail::set_block(m, 2, 0, s21 * I);
  detail::set_block(m, 2, 1, cb * Z);
  detail::set_block(m, 2, 2, s22 * I);
  detail::set_block(m, 2, 3, c * Z);
  detail::set_block(m, 3, 2, c * Z);
  detail::set_block(m, 3, 3, nu * I);
  return m;
}

inline ConditioningData conditioning_data(Protocol protocol, double t, const ProtocolParams& p,
                                          const HybridNoiseParams& hn) {
  detail::require_transmissivity(t);
  const double nu = p.eve_variance, va = p.composite_variance(), v0 = p.vacuum_variance;
  const double l0 = hn.poisson_mean, sg = hn.gaussian_variance;
  const auto I = detail::id2();
  const auto Z = detail::pauli_z();
  ConditioningData d;
  if (protocol == Protocol::one_way) {
    d.bob_variance = t * va + (1.0 - t) * nu + l0 + sg;
    d.cross.resize(4, 2);
    d.cross.block<2, 2>(0, 0) = std::sqrt(t * (1.0 - t)) * (nu - va) * I;
    d.cross.block<2, 2>(2, 0) = std::sqrt((1.0 - t) * (nu * nu - 1.0)) * Z;
  } else {
    d.bob_variance = t * va + t * t * v0 + (1.0 - t * t) * nu + (1.0 + t) * l0 + (1.0 + t) * sg;
    const double zeta = va + t * (v0 - nu) + l0 + sg;
    d.cross.resize(8, 2);
    d.cross.block<2, 2>(0, 0) = t * std::sqrt(1.0 - t) * (nu - v0) * I;
    d.cross.block<2, 2>(2, 0) = std::sqrt(t * (1.0 - t) * (nu * nu - 1.0)) * Z;
    d.cross.block<2, 2>(4, 0) = -std::sqrt(t * (1.0 - t)) * zeta * Z;
    d.cross.block<2, 2>(6, 0) = std::sqrt((1.0 - t) * (nu * nu - 1.0)) * I;
  }
  if (!(d.bob_variance > 0.0)) throw DomainError("conditioning_data: Bob variance must be > 0");
  return d;
}

// Eve's covariance after Bob's homodyne outcome on the q quadrature.
inline CovarianceMatrix eve_conditional_covariance(Protocol protocol, double t, const ProtocolParams& p,
                                                   const HybridNoiseParams& hn) {
  const auto e = eve_covariance(protocol, t, p, hn);
  const auto d = conditioning_data(protocol, t, p, hn);
  CovarianceMatrix out = e - (d.cross * d.projector * d.cross.transpose()) / d.bob_variance;
  return 0.5 * (out + out.transpose());
}

struct HolevoResult {
  double chi = 0.0;  // bits
  SymplecticSpectrum unconditional;
  SymplecticSpectrum conditional;
};

inline HolevoResult holevo_detailed(Protocol protocol, double t, const ProtocolParams& p,
                                    const HybridNoiseParams& hn) {
  HolevoResult r;
  r.unconditional = symplectic_eigenvalues(eve_covariance(protocol, t, p, hn));
  r.conditional = symplectic_eigenvalues(eve_conditional_covariance(protocol, t, p, hn));
  r.chi = von_neumann_entropy(r.unconditional) - von_neumann_entropy(r.conditional);
  return r;
}

inline double holevo(Protocol protocol, double t, const ProtocolParams& p, const HybridNoiseParams& hn) {
  return holevo_detailed(protocol, t, p, hn).chi;
}

}  // namespace fsoqkd
