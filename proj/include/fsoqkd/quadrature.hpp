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
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"

namespace fsoqkd {

struct Tolerance {
  double abs = 1e-10;
  double rel = 1e-8;
};

template <class T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule. Node tables come
// from Boost; the Gauss nodes sit at the odd Kronrod indices.
struct Gk21 {
  static const auto& kronrod_x() { return boost::math::quadrature::gauss_kronrod<double, 21>::abscissa(); }
  static const auto& kronrod_w() { return boost::math::quadrature::gauss_kronrod<double, 21>::weights(); }
  static const auto& gauss_w() { return boost::math::quadrature::gauss<double, 10>::weights(); }
};

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
};

template <class T, class F>
Panel<T> gk21_panel(F& f, double a, double b) {
  const auto& xk = Gk21::kronrod_x();
  const auto& wk = Gk21::kronrod_w();
  const auto& wg = Gk21::gauss_w();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = wk[0] * fc;
  T gauss{};  // 10-point rule has no centre node
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const T fsum = f(c - h * xk[i]) + f(c + h * xk[i]);
    kron += wk[i] * fsum;
    if (i % 2 == 1) gauss += wg[i / 2] * fsum;
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::abs(kron - gauss)};
}

template <class T>
struct PanelWorse {
  bool operator()(const Panel<T>& x, const Panel<T>& y) const { return x.error < y.error; }
};

}  // namespace detail

// Globally adaptive Gauss-Kronrod (21 point) quadrature. `breakpoints` must be
// sorted; each consecutive pair seeds one initial panel, which lets callers
// align panels with oscillation zeros or kinks. Throws NumericalError when the
// panel budget is exhausted before the tolerance is met.
template <class F>
auto integrate(F&& f, std::span<const double> breakpoints, Tolerance tol = {},
               std::size_t max_panels = 20000)
    -> QuadratureResult<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");
  std::priority_queue<detail::Panel<T>, std::vector<detail::Panel<T>>, detail::PanelWorse<T>> heap;
  std::size_t evals = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] >= breakpoints[i])) throw DomainError("integrate: breakpoints must be sorted");
    if (breakpoints[i + 1] == breakpoints[i]) continue;
    heap.push(detail::gk21_panel<T>(f, breakpoints[i], breakpoints[i + 1]));
    evals += 21;
  }
  auto totals = [&heap] {
    // priority_queue has no iteration; rebuild from a copy.
    auto copy = heap;
    T v{};
    double e = 0.0;
    KahanSum er;
    while (!copy.empty()) {
      v += copy.top().value;
      er.add(copy.top().error);
      copy.pop();
    }
    e = er.value();
    return std::pair<T, double>{v, e};
  };
  if (heap.empty()) return {T{}, 0.0, 0};

  // Running totals are updated incrementally; a full recompute is done only
  // at termination to shed accumulated rounding.
  auto [value, error] = totals();
  while (error > std::max(tol.abs, tol.rel * std::abs(value))) {
    if (heap.size() >= max_panels) {
      throw NumericalError("integrate: panel budget exhausted before reaching tolerance", error);
    }
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NumericalError("integrate: panel width underflow", error);
    }
    heap.pop();
    auto left = detail::gk21_panel<T>(f, worst.a, mid);
    auto right = detail::gk21_panel<T>(f, mid, worst.b);
    evals += 42;
    value += (left.value + right.value) - worst.value;
    error += (left.error + right.error) - worst.error;
    heap.push(left);
    heap.push(right);
    if (error < 0.0) error = totals().second;
  }
  auto [v, e] = totals();
  return {v, e, evals};
}

template <class F>
auto integrate(F&& f, double a, double b, Tolerance tol = {}, std::size_t max_panels = 20000) {
  const std::array<double, 2> bp{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(bp), tol, max_panels);
}

// Interior zeros of J0(omega * x) on (a, b) merged with `extra` and the end
// points. Used to align panels with Bessel oscillations.
inline std::vector<double> bessel_breakpoints(double a, double b, double omega,
                                              std::span<const double> extra = {}) {
  std::vector<double> pts{a, b};
  if (omega > 0.0) {
    for (int n = 1;; ++n) {
      // McMahon's expansion is accurate to ~1e-6 already for n = 1 and the
      // exact position is not needed for panel splitting.
      const double beta = (static_cast<double>(n) - 0.25) * kPi;
      const double zero = beta + 1.0 / (8.0 * beta) - 124.0 / (3.0 * std::pow(8.0 * beta, 3));
      const double x = zero / omega;
      if (x >= b) break;
      if (x > a) pts.push_back(x);
      if (n > 1000000) break;
    }
  }
  for (double x : extra) {
    if (x > a && x < b) pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Composite Gauss-Legendre rule (20 points per panel) over the given sorted
// breakpoints. Returned as parallel node / weight vectors so that one rule can
// be applied to many integrands sharing the same oscillation structure.
struct FixedRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline FixedRule composite_gauss_legendre(std::span<const double> breakpoints) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  FixedRule rule;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] == 0.0) {
        rule.nodes.push_back(c);
        rule.weights.push_back(h * w[k]);
        continue;
      }
      rule.nodes.push_back(c - h * x[k]);
      rule.weights.push_back(h * w[k]);
      rule.nodes.push_back(c + h * x[k]);
      rule.weights.push_back(h * w[k]);
    }
  }
  return rule;
}

}  // namespace fsoqkd
