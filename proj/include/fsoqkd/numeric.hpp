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

#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/detail/bessel_j0.hpp>
#include <boost/math/special_functions/detail/bessel_j1.hpp>

#include "fsoqkd/errors.hpp"

namespace fsoqkd {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Complex = std::complex<double>;

// Order-0 and order-1 Bessel functions of the first kind. The dedicated
// rational approximations are an order of magnitude faster than the
// general-order path and agree with it to ~1e-15.
inline double bessel_j0(double x) {
  return boost::math::detail::bessel_j0(std::abs(x));
}

inline double bessel_j1(double x) {
  const double v = boost::math::detail::bessel_j1(std::abs(x));
  return x < 0.0 ? -v : v;
}

// n-th positive zero of J0, n >= 1.
inline double bessel_j0_zero(int n) {
  return boost::math::cyl_bessel_j_zero(0.0, n);
}

// Compensated summation.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

using Rng = std::mt19937_64;

// Independent generator for (seed, stream). Streams are addressed by index so
// the draw sequence of stream k does not depend on how many other streams were
// consumed or in which order.
inline Rng make_substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5eedU};
  return Rng(seq);
}

// A fresh distribution object per draw keeps every draw a pure function of
// the generator state (no cached second variate).
inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

// Uniform on [0, 1).
inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

// Uniform on (0, 1].
inline double uniform_open(Rng& rng) { return 1.0 - uniform01(rng); }

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("format_double: to_chars failed");
  return std::string(buf.data(), ptr);
}

// Barycentric interpolant on Chebyshev points of the second kind. Used for
// smooth functions on a closed interval where ~50 nodes reach machine
// precision.
class ChebyshevInterpolant {
 public:
  ChebyshevInterpolant() = default;

  ChebyshevInterpolant(double a, double b, std::size_t nodes,
                       const std::function<double(double)>& f)
      : a_(a), b_(b), x_(nodes), fx_(nodes) {
    if (nodes < 2 || !(b > a)) throw DomainError("ChebyshevInterpolant: bad interval");
    const std::size_t n = nodes - 1;
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = std::cos(kPi * static_cast<double>(k) / static_cast<double>(n));
      x_[k] = 0.5 * (a + b) + 0.5 * (b - a) * t;
      fx_[k] = f(x_[k]);
    }
  }

  double operator()(double x) const {
    const std::size_t n = x_.size() - 1;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double diff = x - x_[k];
      if (diff == 0.0) return fx_[k];
      double w = (k % 2 == 0) ? 1.0 : -1.0;
      if (k == 0 || k == n) w *= 0.5;
      w /= diff;
      num += w * fx_[k];
      den += w;
    }
    return num / den;
  }

  double lower() const { return a_; }
  double upper() const { return b_; }
  std::span<const double> nodes() const { return x_; }
  std::span<const double> values() const { return fx_; }

 private:
  double a_ = 0.0, b_ = 1.0;
  std::vector<double> x_, fx_;
};

// Four-point Lagrange interpolation on a uniform grid starting at 0.
template <class T>
class UniformTable {
 public:
  UniformTable() = default;
  UniformTable(double step, std::vector<T> values) : step_(step), v_(std::move(values)) {
    if (v_.size() < 4 || !(step_ > 0.0)) throw DomainError("UniformTable: need >= 4 samples");
  }

  double step() const { return step_; }
  double upper() const { return step_ * static_cast<double>(v_.size() - 1); }
  std::size_t size() const { return v_.size(); }
  const std::vector<T>& values() const { return v_; }

  // Valid on [0, upper()]. Near x = 0 the table is treated as even in x.
  T operator()(double x) const {
    const double u = x / step_;
    const auto last = static_cast<std::ptrdiff_t>(v_.size()) - 1;
    auto i = static_cast<std::ptrdiff_t>(std::floor(u));
    if (i >= last) i = last - 1;
    if (i < 0) i = 0;
    const double t = u - static_cast<double>(i);
    auto at = [&](std::ptrdiff_t j) -> const T& {
      if (j < 0) j = -j;
      if (j > last) j = last;
      return v_[static_cast<std::size_t>(j)];
    };
    std::ptrdiff_t base = i - 1;
    double s = t + 1.0;
    if (i + 2 > last) {
      base = last - 3;
      s = u - static_cast<double>(base);
    }
    const double w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    const double w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    const double w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    const double w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    return w0 * at(base) + w1 * at(base + 1) + w2 * at(base + 2) + w3 * at(base + 3);
  }

 private:
  double step_ = 1.0;
  std::vector<T> v_;
};

}  // namespace fsoqkd
