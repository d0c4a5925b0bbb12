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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsoqkd/config.hpp"
#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/sweep.hpp"

namespace fsoqkd {

inline constexpr const char* kCsvHeader =
    "axis,skr_1way,se_1way,skr_2way,se_2way,ratio,diff,mi_1way,holevo_1way,mi_2way,holevo_2way";
inline constexpr const char* kAuxCsvHeader =
    "axis,status,skr_1way_clamped,skr_2way_clamped,mean_T,sigma2,cn2,modulation_variance,subchannels,"
    "clamp_count,degenerate_count,error";

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string hash;  // FNV-1a 64, hex
  std::size_t bytes = 0;
};

struct Manifest {
  std::string fingerprint;
  std::size_t rows = 0;
  std::vector<ManifestEntry> files;  // manifest.json itself is not listed
};

namespace detail {

// RFC 4180 quoting: only fields holding a comma, quote or line break.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string metadata_lines(const SweepTable& t, const std::string& prefix) {
  std::string s;
  s += prefix + "tool: " + t.version + "\n";
  s += prefix + "fingerprint: " + t.fingerprint + "\n";
  s += prefix + "axis: " + axis_name(t.axis) + " (" + axis_label(t.axis) + ")\n";
  s += prefix + "rows: " + std::to_string(t.rows.size()) + "\n";
  s += prefix + "mi columns: averaged mutual-information upper bound, not the true mutual information\n";
  std::istringstream cfg(t.config_text);
  std::string line;
  while (std::getline(cfg, line)) {
    if (line.rfind("snr.mapping", 0) == 0 || line.rfind("protocol.variance_convention", 0) == 0 ||
        line.rfind("run.", 0) == 0) {
      s += prefix + line + "\n";
    }
  }
  return s;
}

inline std::string main_csv(const SweepTable& t) {
  std::string s = metadata_lines(t, "# ");
  s += kCsvHeader;
  s += '\n';
  for (const auto& r : t.rows) {
    s += format_double(r.axis);
    if (!r.ok) {
      for (int i = 0; i < 10; ++i) s += ",FAIL";
      s += '\n';
      continue;
    }
    for (double v : {r.skr_1way, r.se_1way, r.skr_2way, r.se_2way}) s += "," + format_double(v);
    s += "," + (r.ratio ? format_double(*r.ratio) : std::string("NA"));
    for (double v : {r.diff, r.mi_1way, r.holevo_1way, r.mi_2way, r.holevo_2way}) s += "," + format_double(v);
    s += '\n';
  }
  return s;
}

inline std::string aux_csv(const SweepTable& t) {
  std::string s = metadata_lines(t, "# ");
  s += kAuxCsvHeader;
  s += '\n';
  for (const auto& r : t.rows) {
    s += format_double(r.axis);
    if (!r.ok) {
      s += ",FAIL,,,,,,,,,," + csv_field(r.error) + "\n";
      continue;
    }
    s += ",ok";
    for (double v : {r.skr_1way_clamped, r.skr_2way_clamped, r.mean_T, r.sigma2, r.cn2, r.modulation_variance}) {
      s += "," + format_double(v);
    }
    s += "," + std::to_string(r.subchannels) + "," + std::to_string(r.clamp_count) + "," +
         std::to_string(r.degenerate_count) + ",\n";
  }
  return s;
}

inline std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// 1-2-5 ticks covering [lo, hi].
inline std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  }
  return out;
}

struct PlotSeries {
  std::string label;
  std::string colour;
  std::vector<std::pair<double, double>> pts;
};

struct PlotPanel {
  std::string y_label;
  std::vector<PlotSeries> series;
  bool reference_one = false;  // dashed line at y = 1
};

inline std::string render_panel(const PlotPanel& p, double x0, double y0, double w, double h, double xlo, double xhi,
                                bool xlog, const std::string& x_label) {
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& s : p.series) {
    for (const auto& [x, y] : s.pts) {
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (p.reference_one) {
    ylo = std::min(ylo, 1.0);
    yhi = std::max(yhi, 1.0);
  }
  if (!std::isfinite(ylo)) {
    ylo = 0.0;
    yhi = 1.0;
  }
  if (yhi - ylo < 1e-12 * std::max(1.0, std::abs(yhi))) {
    ylo -= 0.5;
    yhi += 0.5;
  }
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  auto fx = [&](double x) {
    const double u = xlog ? (std::log10(x) - std::log10(xlo)) / (std::log10(xhi) - std::log10(xlo))
                          : (x - xlo) / (xhi - xlo);
    return x0 + u * w;
  };
  auto fy = [&](double y) { return y0 + h - (y - ylo) / (yhi - ylo) * h; };

  std::string s;
  s += "<rect x=\"" + svg_num(x0) + "\" y=\"" + svg_num(y0) + "\" width=\"" + svg_num(w) + "\" height=\"" +
       svg_num(h) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  std::vector<double> xt;
  if (xlog) {
    for (double e = std::floor(std::log10(xlo)); e <= std::ceil(std::log10(xhi)); e += 1.0) {
      const double v = std::pow(10.0, e);
      if (v >= xlo * (1 - 1e-9) && v <= xhi * (1 + 1e-9)) xt.push_back(v);
    }
  } else {
    xt = linear_ticks(xlo, xhi);
  }
  for (double v : xt) {
    const double px = fx(v);
    s += "<line x1=\"" + svg_num(px) + "\" y1=\"" + svg_num(y0 + h) + "\" x2=\"" + svg_num(px) + "\" y2=\"" +
         svg_num(y0 + h + 5) + "\" stroke=\"#000\"/>\n";
    s += "<text x=\"" + svg_num(px) + "\" y=\"" + svg_num(y0 + h + 18) + "\" text-anchor=\"middle\">" +
         tick_label(v) + "</text>\n";
  }
  for (double v : linear_ticks(ylo, yhi)) {
    const double py = fy(v);
    s += "<line x1=\"" + svg_num(x0 - 5) + "\" y1=\"" + svg_num(py) + "\" x2=\"" + svg_num(x0) + "\" y2=\"" +
         svg_num(py) + "\" stroke=\"#000\"/>\n";
    s += "<text x=\"" + svg_num(x0 - 8) + "\" y=\"" + svg_num(py + 4) + "\" text-anchor=\"end\">" + tick_label(v) +
         "</text>\n";
  }
  if (p.reference_one) {
    s += "<line x1=\"" + svg_num(x0) + "\" y1=\"" + svg_num(fy(1.0)) + "\" x2=\"" + svg_num(x0 + w) + "\" y2=\"" +
         svg_num(fy(1.0)) + "\" stroke=\"#888\" stroke-dasharray=\"4 4\"/>\n";
  }
  s += "<text x=\"" + svg_num(x0 + w / 2) + "\" y=\"" + svg_num(y0 + h + 36) + "\" text-anchor=\"middle\">" +
       xml_escape(x_label) + "</text>\n";
  s += "<text transform=\"translate(" + svg_num(x0 - 55) + "," + svg_num(y0 + h / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + xml_escape(p.y_label) + "</text>\n";
  double ly = y0 + 16;
  for (const auto& ser : p.series) {
    if (ser.pts.empty()) continue;
    std::string pts;
    for (const auto& [x, y] : ser.pts) pts += svg_num(fx(x)) + "," + svg_num(fy(y)) + " ";
    pts.pop_back();
    s += "<polyline fill=\"none\" stroke=\"" + ser.colour + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    for (const auto& [x, y] : ser.pts) {
      s += "<circle cx=\"" + svg_num(fx(x)) + "\" cy=\"" + svg_num(fy(y)) + "\" r=\"2.5\" fill=\"" + ser.colour +
           "\"/>\n";
    }
    s += "<line x1=\"" + svg_num(x0 + w - 150) + "\" y1=\"" + svg_num(ly - 4) + "\" x2=\"" + svg_num(x0 + w - 125) +
         "\" y2=\"" + svg_num(ly - 4) + "\" stroke=\"" + ser.colour + "\" stroke-width=\"1.5\"/>\n";
    s += "<text x=\"" + svg_num(x0 + w - 120) + "\" y=\"" + svg_num(ly) + "\">" + xml_escape(ser.label) +
         "</text>\n";
    ly += 16;
  }
  return s;
}

inline std::string plot_svg(const SweepTable& t) {
  PlotPanel skr{"SKR (bits per use)", {{"one-way", "#1f77b4", {}}, {"two-way", "#d62728", {}}}, false};
  PlotPanel ratio{"two-way / one-way", {{"ratio", "#2ca02c", {}}}, true};
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  bool positive = true;
  for (const auto& r : t.rows) {
    if (!r.ok) continue;
    xlo = std::min(xlo, r.axis);
    xhi = std::max(xhi, r.axis);
    positive = positive && r.axis > 0.0;
    if (std::isfinite(r.skr_1way)) skr.series[0].pts.emplace_back(r.axis, r.skr_1way);
    if (std::isfinite(r.skr_2way)) skr.series[1].pts.emplace_back(r.axis, r.skr_2way);
    if (r.ratio && std::isfinite(*r.ratio)) ratio.series[0].pts.emplace_back(r.axis, *r.ratio);
  }
  if (!std::isfinite(xlo)) {
    xlo = 0.0;
    xhi = 1.0;
  } else if (xhi == xlo) {
    xlo -= 0.5;
    xhi += 0.5;
    positive = positive && xlo > 0.0;
  }
  const bool xlog = positive && xhi / xlo >= 100.0;
  const std::string xl = axis_label(t.axis);

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"720\" viewBox=\"0 0 760 720\" "
       "font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<metadata>\n" + xml_escape(metadata_lines(t, "")) + "</metadata>\n";
  s += "<title>" + xml_escape("SKR vs " + xl) + "</title>\n";
  s += "<rect width=\"760\" height=\"720\" fill=\"#fff\"/>\n";
  s += render_panel(skr, 90, 30, 640, 280, xlo, xhi, xlog, xl);
  s += render_panel(ratio, 90, 380, 640, 280, xlo, xhi, xlog, xl);
  s += "<text x=\"90\" y=\"705\" fill=\"#666\">" + xml_escape(t.version + "  fingerprint " + t.fingerprint) +
       "</text>\n";
  s += "</svg>\n";
  return s;
}

inline ManifestEntry write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
  return {name, to_hex(fnv1a64(body)), body.size()};
}

}  // namespace detail

// Writes <name>.csv, <name>_aux.csv (format "csv"), <name>.svg (format
// "svg", skipped for an empty table) and manifest.json.
inline Manifest emit_outputs(const SweepTable& table, const std::filesystem::path& out_dir,
                             const std::vector<std::string>& formats, const std::string& name = "sweep") {
  auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
  for (const auto& f : formats) {
    if (f != "csv" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());

  Manifest m;
  m.fingerprint = table.fingerprint;
  m.rows = table.rows.size();
  if (wants("csv")) {
    m.files.push_back(detail::write_file(out_dir, name + ".csv", detail::main_csv(table)));
    m.files.push_back(detail::write_file(out_dir, name + "_aux.csv", detail::aux_csv(table)));
  }
  if (wants("svg") && !table.rows.empty()) {
    m.files.push_back(detail::write_file(out_dir, name + ".svg", detail::plot_svg(table)));
  }

  nlohmann::ordered_json j;
  j["tool"] = table.version;
  j["fingerprint"] = table.fingerprint;
  j["axis"] = axis_name(table.axis);
  j["rows"] = table.rows.size();
  if (table.rows.empty()) j["note"] = "zero rows: no plot written";
  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.ok ? 0 : 1;
  j["failed_rows"] = failed;
  j["files"] = nlohmann::json::array();
  for (const auto& f : m.files) {
    j["files"].push_back({{"path", f.path}, {"fnv1a64", f.hash}, {"bytes", f.bytes}});
  }
  detail::write_file(out_dir, "manifest.json", j.dump(2) + "\n");
  return m;
}

}  // namespace fsoqkd
