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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/algorithm/string/trim.hpp>
#include <boost/math/tools/roots.hpp>

#include "fsoqkd/channel_model.hpp"
#include "fsoqkd/errors.hpp"
#include "fsoqkd/info_bounds.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/quantum_noise.hpp"
#include "fsoqkd/skr_engine.hpp"

namespace fsoqkd {

inline constexpr const char* kToolVersion = "fsoqkd 0.1.0";

enum class SweepAxis { z, sigma2, eta, snr, mimo, lambda0 };
enum class GridSpacing { linear, log };
enum class ChannelMode { physical, fixed };
// How an SNR in dB maps to the modulation variance:
//   total_noise:    V_s = SNR * (lambda_0 + sigma_g^2)
//   gaussian_noise: V_s = SNR * sigma_g^2
enum class SnrMapping { total_noise, gaussian_noise };

struct SweepSpec {
  SweepAxis axis = SweepAxis::z;
  double start = 50.0;
  double stop = 2000.0;
  int points = 20;
  GridSpacing spacing = GridSpacing::linear;
  std::vector<double> values;  // explicit grid; overrides start/stop/points

  std::vector<double> grid() const {
    if (!values.empty()) return values;
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      g[static_cast<std::size_t>(i)] = spacing == GridSpacing::linear
                                           ? start + f * (stop - start)
                                           : std::exp(std::log(start) + f * (std::log(stop) - std::log(start)));
    }
    if (points > 1) g.back() = stop;
    return g;
  }
};

struct SystemConfig {
  BeamGeometry geometry{.tx_count = 4, .rx_count = 4};
  double tx_pitch = 0.0;  // 0: three waists
  double rx_pitch = 0.0;  // 0: three lens radii
  GainModel gain_model = GainModel::captured_power;
  BeamPointing pointing = BeamPointing::aimed;
  TurbulenceParams turbulence;
  HybridNoiseParams noise;
  double tail_tol = kDefaultTailTol;
  ProtocolParams protocol;
  VarianceConvention convention = VarianceConvention::printed;
  ChannelMode channel_mode = ChannelMode::physical;
  double fixed_transmissivity = 0.5;
  int fixed_subchannels = 4;
  double fixed_fading_variance = 0.0;
  MonteCarloOptions mc;
  SweepSpec sweep;
  SnrMapping snr_mapping = SnrMapping::total_noise;
  std::vector<std::string> formats{"csv", "svg"};
  std::string output_name = "sweep";

  // Geometry with the arrays laid out.
  BeamGeometry laid_out_geometry() const {
    BeamGeometry g = geometry;
    g.place_square_arrays(tx_pitch, rx_pitch);
    return g;
  }

  SkrOptions skr_options() const { return {tail_tol, convention}; }
  ChannelOptions channel_options() const { return {gain_model, pointing}; }
};

inline SystemConfig default_config() { return SystemConfig{}; }

// ---------------------------------------------------------------------------
// Names

namespace detail {

template <class E>
struct EnumNames;

template <>
struct EnumNames<SweepAxis> {
  static constexpr std::pair<SweepAxis, const char*> v[] = {
      {SweepAxis::z, "z"}, {SweepAxis::sigma2, "sigma2"}, {SweepAxis::eta, "eta"},
      {SweepAxis::snr, "snr"}, {SweepAxis::mimo, "mimo"}, {SweepAxis::lambda0, "lambda0"}};
};
template <>
struct EnumNames<GridSpacing> {
  static constexpr std::pair<GridSpacing, const char*> v[] = {{GridSpacing::linear, "linear"},
                                                              {GridSpacing::log, "log"}};
};
template <>
struct EnumNames<ChannelMode> {
  static constexpr std::pair<ChannelMode, const char*> v[] = {{ChannelMode::physical, "physical"},
                                                              {ChannelMode::fixed, "fixed"}};
};
template <>
struct EnumNames<SnrMapping> {
  static constexpr std::pair<SnrMapping, const char*> v[] = {{SnrMapping::total_noise, "total_noise"},
                                                             {SnrMapping::gaussian_noise, "gaussian_noise"}};
};
template <>
struct EnumNames<GainModel> {
  static constexpr std::pair<GainModel, const char*> v[] = {{GainModel::captured_power, "captured_power"},
                                                            {GainModel::printed_amplitude, "printed_amplitude"}};
};
template <>
struct EnumNames<BeamPointing> {
  static constexpr std::pair<BeamPointing, const char*> v[] = {{BeamPointing::aimed, "aimed"},
                                                               {BeamPointing::parallel, "parallel"}};
};
template <>
struct EnumNames<VarianceConvention> {
  static constexpr std::pair<VarianceConvention, const char*> v[] = {
      {VarianceConvention::printed, "printed"}, {VarianceConvention::density, "density"}};
};

template <class E>
std::string enum_name(E e) {
  for (const auto& [k, n] : EnumNames<E>::v) {
    if (k == e) return n;
  }
  return "?";
}

template <class E>
E parse_enum(const std::string& key, const std::string& text) {
  std::string allowed;
  for (const auto& [k, n] : EnumNames<E>::v) {
    if (text == n) return k;
    allowed += allowed.empty() ? n : std::string(", ") + n;
  }
  throw ParseError(key, "unknown value '" + text + "' (expected one of: " + allowed + ")");
}

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e || !std::isfinite(v)) {
    throw ParseError(key, "expected a finite number, got '" + text + "'");
  }
  return v;
}

template <class I>
I parse_int(const std::string& key, const std::string& text) {
  I v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) throw ParseError(key, "expected an integer, got '" + text + "'");
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    boost::algorithm::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

inline std::string join_strings(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

// One entry per key, in canonical order.
struct KeySpec {
  const char* key;
  std::function<void(SystemConfig&, const std::string&)> set;
  std::function<std::string(const SystemConfig&)> get;
};

#define FSOQKD_DOUBLE_KEY(name, field)                                                                  \
  KeySpec {                                                                                           \
    name, [](SystemConfig& c, const std::string& v) { c.field = parse_double(name, v); },             \
        [](const SystemConfig& c) { return format_double(c.field); }                                  \
  }
#define FSOQKD_INT_KEY(name, field, type)                                                               \
  KeySpec {                                                                                           \
    name, [](SystemConfig& c, const std::string& v) { c.field = parse_int<type>(name, v); },          \
        [](const SystemConfig& c) { return std::to_string(c.field); }                                 \
  }
#define FSOQKD_ENUM_KEY(name, field, type)                                                              \
  KeySpec {                                                                                           \
    name, [](SystemConfig& c, const std::string& v) { c.field = parse_enum<type>(name, v); },         \
        [](const SystemConfig& c) { return enum_name(c.field); }                                      \
  }

inline const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      FSOQKD_DOUBLE_KEY("geometry.wavelength", geometry.wavelength),
      FSOQKD_DOUBLE_KEY("geometry.waist", geometry.waist),
      FSOQKD_INT_KEY("geometry.tx_count", geometry.tx_count, int),
      FSOQKD_INT_KEY("geometry.rx_count", geometry.rx_count, int),
      FSOQKD_DOUBLE_KEY("geometry.rx_lens_radius", geometry.rx_lens_radius),
      FSOQKD_DOUBLE_KEY("geometry.link_distance", geometry.link_distance),
      FSOQKD_DOUBLE_KEY("geometry.band_limit", geometry.band_limit_override),
      FSOQKD_DOUBLE_KEY("geometry.tx_pitch", tx_pitch),
      FSOQKD_DOUBLE_KEY("geometry.rx_pitch", rx_pitch),
      FSOQKD_ENUM_KEY("geometry.gain_model", gain_model, GainModel),
      FSOQKD_ENUM_KEY("geometry.pointing", pointing, BeamPointing),
      FSOQKD_DOUBLE_KEY("turbulence.cn2", turbulence.cn2),
      FSOQKD_DOUBLE_KEY("turbulence.pointing_jitter", turbulence.pointing_jitter),
      FSOQKD_DOUBLE_KEY("turbulence.attenuation", turbulence.attenuation_db_per_m),
      FSOQKD_DOUBLE_KEY("turbulence.detector_efficiency", turbulence.detector_efficiency),
      FSOQKD_DOUBLE_KEY("noise.poisson_mean", noise.poisson_mean),
      FSOQKD_DOUBLE_KEY("noise.gaussian_mean", noise.gaussian_mean),
      FSOQKD_DOUBLE_KEY("noise.gaussian_variance", noise.gaussian_variance),
      FSOQKD_DOUBLE_KEY("noise.tail_tol", tail_tol),
      FSOQKD_DOUBLE_KEY("protocol.modulation_variance", protocol.modulation_variance),
      FSOQKD_DOUBLE_KEY("protocol.vacuum_variance", protocol.vacuum_variance),
      FSOQKD_DOUBLE_KEY("protocol.eve_variance", protocol.eve_variance),
      FSOQKD_DOUBLE_KEY("protocol.reconciliation", protocol.reconciliation),
      FSOQKD_ENUM_KEY("protocol.variance_convention", convention, VarianceConvention),
      FSOQKD_ENUM_KEY("channel.mode", channel_mode, ChannelMode),
      FSOQKD_DOUBLE_KEY("channel.fixed_transmissivity", fixed_transmissivity),
      FSOQKD_INT_KEY("channel.fixed_subchannels", fixed_subchannels, int),
      FSOQKD_DOUBLE_KEY("channel.fixed_fading_variance", fixed_fading_variance),
      FSOQKD_INT_KEY("run.seed", mc.seed, std::uint64_t),
      FSOQKD_INT_KEY("run.realizations", mc.realizations, std::size_t),
      FSOQKD_INT_KEY("run.batches", mc.batches, std::size_t),
      FSOQKD_INT_KEY("run.threads", mc.threads, unsigned),
      FSOQKD_ENUM_KEY("sweep.axis", sweep.axis, SweepAxis),
      FSOQKD_DOUBLE_KEY("sweep.start", sweep.start),
      FSOQKD_DOUBLE_KEY("sweep.stop", sweep.stop),
      FSOQKD_INT_KEY("sweep.points", sweep.points, int),
      FSOQKD_ENUM_KEY("sweep.spacing", sweep.spacing, GridSpacing),
      KeySpec{"sweep.values",
              [](SystemConfig& c, const std::string& v) {
                c.sweep.values.clear();
                for (const auto& item : split_list(v)) c.sweep.values.push_back(parse_double("sweep.values", item));
              },
              [](const SystemConfig& c) { return join_doubles(c.sweep.values); }},
      FSOQKD_ENUM_KEY("snr.mapping", snr_mapping, SnrMapping),
      KeySpec{"output.formats",
              [](SystemConfig& c, const std::string& v) { c.formats = split_list(v); },
              [](const SystemConfig& c) { return join_strings(c.formats); }},
      KeySpec{"output.name", [](SystemConfig& c, const std::string& v) { c.output_name = v; },
              [](const SystemConfig& c) { return c.output_name; }},
  };
  return specs;
}

#undef FSOQKD_DOUBLE_KEY
#undef FSOQKD_INT_KEY
#undef FSOQKD_ENUM_KEY

}  // namespace detail

// Checks every invariant and reports the first violation with its key path.
inline void validate_config(const SystemConfig& c) {
  auto req = [](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ParseError(key, msg);
  };
  const auto& g = c.geometry;
  req(g.wavelength > 0.0, "geometry.wavelength", "wavelength must be > 0");
  req(g.waist > 0.0, "geometry.waist", "waist must be > 0");
  req(g.tx_count >= 1, "geometry.tx_count", "tx_count must be ≥ 1");
  req(g.rx_count >= 1, "geometry.rx_count", "rx_count must be ≥ 1");
  req(g.rx_lens_radius > 0.0, "geometry.rx_lens_radius", "lens radius must be > 0");
  req(g.link_distance > 0.0, "geometry.link_distance", "link distance must be > 0");
  req(g.band_limit_override >= 0.0, "geometry.band_limit", "band limit override must be ≥ 0");
  req(kTwoPi * g.band_limit() < g.wavenumber(), "geometry.band_limit", "band limit must satisfy 2*pi*rho_max < k");
  req(c.tx_pitch >= 0.0, "geometry.tx_pitch", "pitch must be ≥ 0");
  req(c.rx_pitch >= 0.0, "geometry.rx_pitch", "pitch must be ≥ 0");
  const auto& t = c.turbulence;
  req(t.cn2 >= 0.0, "turbulence.cn2", "Cn2 must be ≥ 0");
  req(t.pointing_jitter >= 0.0, "turbulence.pointing_jitter", "pointing jitter must be ≥ 0");
  req(t.attenuation_db_per_m >= 0.0, "turbulence.attenuation", "attenuation must be ≥ 0");
  req(t.detector_efficiency >= 0.0 && t.detector_efficiency <= 1.0, "turbulence.detector_efficiency",
      "detector efficiency must lie in [0, 1]");
  req(c.noise.poisson_mean >= 0.0, "noise.poisson_mean", "Poisson mean must be ≥ 0");
  req(c.noise.gaussian_variance > 0.0, "noise.gaussian_variance", "Gaussian variance must be > 0");
  req(c.tail_tol > 0.0 && c.tail_tol < 1.0, "noise.tail_tol", "tail tolerance must lie in (0, 1)");
  const auto& p = c.protocol;
  req(p.modulation_variance > 0.0, "protocol.modulation_variance", "modulation variance must be > 0");
  req(p.vacuum_variance >= 1.0, "protocol.vacuum_variance", "vacuum variance must be ≥ 1");
  req(p.eve_variance >= 1.0, "protocol.eve_variance", "Eve variance must be ≥ 1");
  req(p.reconciliation >= 0.0 && p.reconciliation <= 1.0, "protocol.reconciliation",
      "reconciliation efficiency must lie in [0, 1]");
  req(c.fixed_transmissivity >= 0.0 && c.fixed_transmissivity <= 1.0, "channel.fixed_transmissivity",
      "transmissivity must lie in [0, 1]");
  req(c.fixed_subchannels >= 1, "channel.fixed_subchannels", "sub-channel count must be ≥ 1");
  req(c.fixed_fading_variance >= 0.0, "channel.fixed_fading_variance", "fading variance must be ≥ 0");
  req(c.mc.realizations >= 1, "run.realizations", "realizations must be ≥ 1");
  req(c.mc.batches >= 1, "run.batches", "batches must be ≥ 1");
  req(c.mc.threads >= 1, "run.threads", "threads must be ≥ 1");
  const auto grid = c.sweep.grid();
  if (c.sweep.values.empty()) {
    req(c.sweep.points >= 1, "sweep.points", "points must be ≥ 1");
    req(c.sweep.points == 1 || c.sweep.start != c.sweep.stop, "sweep.stop", "start and stop must differ");
    req(c.sweep.spacing == GridSpacing::linear || (c.sweep.start > 0.0 && c.sweep.stop > 0.0), "sweep.spacing",
        "log spacing needs positive bounds");
  }
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    inc = inc && grid[i] > grid[i - 1];
    dec = dec && grid[i] < grid[i - 1];
  }
  req(inc || dec, "sweep.values", "grid must be strictly monotone");
  for (double v : grid) {
    switch (c.sweep.axis) {
      case SweepAxis::z: req(v > 0.0, "sweep.values", "distances must be > 0"); break;
      case SweepAxis::sigma2: req(v >= 0.0, "sweep.values", "sigma^2 values must be ≥ 0"); break;
      case SweepAxis::eta: req(v >= 0.0 && v <= 1.0, "sweep.values", "efficiencies must lie in [0, 1]"); break;
      case SweepAxis::snr: break;
      case SweepAxis::mimo:
        req(v >= 1.0 && v == std::floor(v) && v <= 1024.0, "sweep.values", "MIMO sizes must be integers in [1, 1024]");
        break;
      case SweepAxis::lambda0: req(v >= 0.0, "sweep.values", "Poisson means must be ≥ 0"); break;
    }
  }
  for (const auto& f : c.formats) {
    req(f == "csv" || f == "svg", "output.formats", "unknown format '" + f + "' (expected csv, svg)");
  }
  req(c.channel_mode == ChannelMode::physical || c.sweep.axis != SweepAxis::z, "sweep.axis",
      "the z axis needs channel.mode = physical");
  req(!c.output_name.empty() && c.output_name.find('/') == std::string::npos, "output.name",
      "name must be a plain file stem");
}

// Flat "key = value" document. '#' starts a comment; blank lines are
// ignored. Unspecified keys keep their defaults.
inline SystemConfig parse_config(std::string_view text) {
  SystemConfig c = default_config();
  std::map<std::string, const detail::KeySpec*> index;
  for (const auto& s : detail::key_specs()) index[s.key] = &s;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    boost::algorithm::trim(key);
    boost::algorithm::trim(value);
    const auto it = index.find(key);
    if (it == index.end()) throw ParseError(key, "unknown key");
    if (!seen.insert(key).second) throw ParseError(key, "duplicate key");
    it->second->set(c, value);
  }
  validate_config(c);
  return c;
}

// Canonical form: every key, fixed order, shortest round-trip numbers.
inline std::string serialize_config(const SystemConfig& c) {
  std::string out;
  for (const auto& s : detail::key_specs()) {
    out += s.key;
    out += " = ";
    out += s.get(c);
    out += '\n';
  }
  return out;
}

inline std::string config_fingerprint(const SystemConfig& c) {
  return to_hex(fnv1a64(std::string(kToolVersion) + "\n" + serialize_config(c)));
}

// ---------------------------------------------------------------------------
// Axis helpers

inline std::string axis_name(SweepAxis a) { return detail::enum_name(a); }

inline std::string axis_label(SweepAxis a) {
  switch (a) {
    case SweepAxis::z: return "link distance z (m)";
    case SweepAxis::sigma2: return "log-irradiance variance sigma^2";
    case SweepAxis::eta: return "detector efficiency eta";
    case SweepAxis::snr: return "SNR (dB)";
    case SweepAxis::mimo: return "MIMO size N = N_T = N_R";
    case SweepAxis::lambda0: return "Poisson mean lambda_0";
  }
  return "";
}

// Cn2 that yields the requested log-irradiance variance at this geometry.
// The search is confined to Cn2 in [0, 1e-12], where the variance increases
// with Cn2 for the link lengths of interest.
inline double cn2_for_scintillation(double sigma2, const TurbulenceParams& t, const BeamGeometry& g) {
  if (!(sigma2 >= 0.0)) throw DomainError("cn2_for_scintillation: sigma^2 must be >= 0");
  if (sigma2 == 0.0) return 0.0;
  auto s_of = [&](double log_cn2) {
    TurbulenceParams tt = t;
    tt.cn2 = std::exp(log_cn2);
    return scintillation_variance(tt, g) - sigma2;
  };
  const double lo = std::log(1e-30), hi = std::log(1e-12);
  if (s_of(hi) < 0.0) {
    throw ConfigError("sigma^2 = " + format_double(sigma2) + " is not reachable with Cn2 <= 1e-12 at this geometry");
  }
  if (s_of(lo) > 0.0) return 1e-30;
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(s_of, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (r.first + r.second));
}

inline double snr_to_modulation_variance(double snr_db, SnrMapping m, const HybridNoiseParams& hn) {
  const double lin = std::pow(10.0, snr_db / 10.0);
  return m == SnrMapping::total_noise ? lin * (hn.poisson_mean + hn.gaussian_variance) : lin * hn.gaussian_variance;
}

// Config for one grid point of the sweep.
inline SystemConfig config_at(const SystemConfig& base, double x) {
  SystemConfig c = base;
  switch (base.sweep.axis) {
    case SweepAxis::z: c.geometry.link_distance = x; break;
    case SweepAxis::sigma2:
      // A fixed channel takes the variance directly as its fading variance.
      if (base.channel_mode == ChannelMode::fixed) {
        c.fixed_fading_variance = x;
      } else {
        c.turbulence.cn2 = cn2_for_scintillation(x, base.turbulence, base.laid_out_geometry());
      }
      break;
    case SweepAxis::eta: c.turbulence.detector_efficiency = x; break;
    case SweepAxis::snr: c.protocol.modulation_variance = snr_to_modulation_variance(x, base.snr_mapping, base.noise); break;
    case SweepAxis::mimo: {
      const int n = static_cast<int>(x);
      c.geometry.tx_count = n;
      c.geometry.rx_count = n;
      c.fixed_subchannels = n;
      break;
    }
    case SweepAxis::lambda0: c.noise.poisson_mean = x; break;
  }
  return c;
}

}  // namespace fsoqkd
