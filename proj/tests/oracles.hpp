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

// Reference computations written independently of the library code paths,
// plus small sampling helpers shared by the tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Two-mode symplectic eigenvalues from the local invariants:
// lambda_pm^2 = (D +- sqrt(D^2 - 4 det S)) / 2 with D = det A + det B + 2 det C.
inline std::vector<double> two_mode_spectrum(const Eigen::Matrix4d& s) {
  const double da = s.block<2, 2>(0, 0).determinant();
  const double db = s.block<2, 2>(2, 2).determinant();
  const double dc = s.block<2, 2>(0, 2).determinant();
  const double delta = da + db + 2.0 * dc;
  const double disc = std::sqrt(std::max(delta * delta - 4.0 * s.determinant(), 0.0));
  return {std::sqrt((delta + disc) / 2.0), std::sqrt((delta - disc) / 2.0)};
}

// Random physical two-mode state: thermal diag(n1, n1, n2, n2) dressed by
// local squeezers and rotations and a beam splitter.
inline Eigen::Matrix4d random_two_mode_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> nu(1.0, 10.0), sq(-1.0, 1.0), ang(0.0, 2.0 * std::numbers::pi);
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  const double n1 = nu(rng), n2 = nu(rng);
  s.diagonal() << n1, n1, n2, n2;
  auto local = [&](int mode, const Eigen::Matrix2d& m) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t.block<2, 2>(2 * mode, 2 * mode) = m;
    return t;
  };
  auto rot = [](double a) {
    Eigen::Matrix2d r;
    r << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
    return r;
  };
  auto squeeze = [](double r) { return Eigen::Vector2d(std::exp(r), std::exp(-r)).asDiagonal().toDenseMatrix(); };
  const double th = ang(rng);
  Eigen::Matrix4d bs = Eigen::Matrix4d::Zero();
  bs.block<2, 2>(0, 0) = std::cos(th) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 2) = std::cos(th) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(0, 2) = std::sin(th) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 0) = -std::sin(th) * Eigen::Matrix2d::Identity();
  const Eigen::Matrix4d sym = local(0, rot(ang(rng)) * squeeze(sq(rng))) * local(1, rot(ang(rng)) * squeeze(sq(rng))) *
                              bs * local(0, squeeze(sq(rng))) * local(1, squeeze(sq(rng)));
  Eigen::Matrix4d out = sym * s * sym.transpose();
  return 0.5 * (out + out.transpose());
}

// Log-irradiance variance with aperture averaging, evaluated term by term in
// long double as exp(t1) * exp(t2) - 1.
inline double scintillation_eq(double cn2, double wavelength, double z, double a_r) {
  using L = long double;
  const L k = 2.0L * std::numbers::pi_v<L> / static_cast<L>(wavelength);
  const L chi2 = 1.23L * static_cast<L>(cn2) * std::pow(k, 7.0L / 6.0L) * std::pow(static_cast<L>(z), 11.0L / 6.0L);
  const L d = static_cast<L>(a_r) * std::sqrt(k / static_cast<L>(z));
  const L d2 = d * d;
  const L c125 = std::pow(chi2, 12.0L / 10.0L);
  const L e1 = std::exp(0.49L * chi2 / std::pow(1.0L + 0.18L * d2 + 0.56L * c125, 7.0L / 6.0L));
  const L e2 = std::exp(0.51L * chi2 / std::pow(1.0L + 0.9L * d2 + 0.62L * d2 * c125, 5.0L / 6.0L));
  return static_cast<double>(e1 * e2 - 1.0L);
}

inline double gaussian_entropy_bits(double var) {
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * var);
}

struct Moments {
  double mean = 0.0;
  double mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;
};

// Sample mean and variance with their standard errors (the variance SE from
// the fourth central moment).
inline Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  long double s = 0.0L;
  for (double v : x) s += v;
  const double m = static_cast<double>(s / n);
  long double m2 = 0.0L, m4 = 0.0L;
  for (double v : x) {
    const long double d = v - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  Moments out;
  out.mean = m;
  out.var = static_cast<double>(m2 / (n - 1.0));
  out.mean_se = std::sqrt(out.var / n);
  const double mu4 = static_cast<double>(m4 / n);
  out.var_se = std::sqrt(std::max(mu4 - out.var * out.var, 0.0) / n);
  return out;
}

inline double covariance(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  long double sx = 0.0L, sy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double c = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - mx) * (y[i] - my);
  return static_cast<double>(c / (n - 1.0));
}

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic 1% critical value of the KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace oracle
