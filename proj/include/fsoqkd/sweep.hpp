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

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fsoqkd/channel_model.hpp"
#include "fsoqkd/config.hpp"
#include "fsoqkd/errors.hpp"
#include "fsoqkd/skr_engine.hpp"

namespace fsoqkd {

struct SweepRow {
  double axis = 0.0;
  bool ok = true;
  std::string error;  // set when !ok

  double skr_1way = 0.0;
  double se_1way = 0.0;
  double skr_2way = 0.0;
  double se_2way = 0.0;
  std::optional<double> ratio;  // two-way / one-way, only where one-way > 0
  double diff = 0.0;            // two-way - one-way
  double mi_1way = 0.0;
  double holevo_1way = 0.0;
  double mi_2way = 0.0;
  double holevo_2way = 0.0;

  // Auxiliary columns.
  double skr_1way_clamped = 0.0;
  double skr_2way_clamped = 0.0;
  double mean_T = 0.0;
  double sigma2 = 0.0;  // log-irradiance variance of the point (fading variance for a fixed channel)
  double cn2 = 0.0;
  double modulation_variance = 0.0;
  std::size_t subchannels = 0;
  std::size_t clamp_count = 0;
  std::size_t degenerate_count = 0;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::z;
  std::string fingerprint;
  std::string version = kToolVersion;
  std::string config_text;  // canonical serialisation
  std::vector<SweepRow> rows;
};

namespace detail {

inline void fill_row(SweepRow& row, const std::array<SkrResult, 2>& res) {
  const SkrResult& a = res[0];
  const SkrResult& b = res[1];
  row.skr_1way = a.total;
  row.se_1way = a.total_se;
  row.skr_2way = b.total;
  row.se_2way = b.total_se;
  if (a.total > 0.0) row.ratio = b.total / a.total;
  row.diff = b.total - a.total;
  row.mi_1way = a.mi;
  row.holevo_1way = a.holevo;
  row.mi_2way = b.mi;
  row.holevo_2way = b.holevo;
  row.skr_1way_clamped = a.total_clamped;
  row.skr_2way_clamped = b.total_clamped;
  row.mean_T = a.mean_T;
  row.clamp_count = a.clamp_count;
  row.degenerate_count = a.degenerate_count;
}

inline bool shares_geometry(SweepAxis a) {
  return a == SweepAxis::sigma2 || a == SweepAxis::eta || a == SweepAxis::snr || a == SweepAxis::lambda0;
}

}  // namespace detail

using SweepProgress = std::function<void(std::size_t index, std::size_t count, const SweepRow&)>;

// Evaluates both protocols at every grid point. A failing point yields a
// row with ok = false and the error text; the other points still run.
inline SweepTable run_sweep(const SystemConfig& config, const SweepProgress& progress = {}) {
  validate_config(config);
  SweepTable table;
  table.axis = config.sweep.axis;
  table.fingerprint = config_fingerprint(config);
  table.config_text = serialize_config(config);

  const auto grid = config.sweep.grid();
  std::vector<std::optional<SystemConfig>> point(grid.size());
  table.rows.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    table.rows[k].axis = grid[k];
    try {
      point[k] = config_at(config, grid[k]);
    } catch (const std::exception& e) {
      table.rows[k].ok = false;
      table.rows[k].error = e.what();
    }
  }

  // Axes that leave the geometry alone share one set of tables, sized for
  // the widest misalignment over the grid.
  std::shared_ptr<const BeamPropagator> shared;
  if (config.channel_mode == ChannelMode::physical && detail::shares_geometry(config.sweep.axis)) {
    const BeamGeometry g = config.laid_out_geometry();
    double d_max = 0.0;
    for (const auto& p : point) {
      if (p) d_max = std::max(d_max, required_offset_range(g, p->turbulence, p->channel_options()));
    }
    if (d_max > 0.0) {
      try {
        shared = std::make_shared<BeamPropagator>(g, d_max, config.channel_options().samples_per_period);
      } catch (const std::exception&) {
        shared = nullptr;  // each point reports its own failure below
      }
    }
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    SweepRow& row = table.rows[k];
    if (point[k]) {
      const SystemConfig& c = *point[k];
      try {
        const SkrEvaluator eval(c.protocol, c.noise, c.skr_options());
        row.modulation_variance = c.protocol.modulation_variance;
        if (c.channel_mode == ChannelMode::physical) {
          const PhysicalChannel ch(c.laid_out_geometry(), c.turbulence, c.channel_options(), shared);
          row.sigma2 = ch.scintillation_variance();
          row.cn2 = c.turbulence.cn2;
          row.subchannels = ch.subchannel_count();
          detail::fill_row(row, skr_mimo_pair(ch, eval, c.mc));
        } else {
          const FixedChannel ch(static_cast<std::size_t>(c.fixed_subchannels),
                                c.fixed_transmissivity * c.turbulence.detector_efficiency, c.fixed_fading_variance);
          row.sigma2 = c.fixed_fading_variance;
          row.subchannels = ch.subchannel_count();
          detail::fill_row(row, skr_mimo_pair(ch, eval, c.mc));
        }
      } catch (const std::exception& e) {
        row = SweepRow{};
        row.axis = grid[k];
        row.ok = false;
        row.error = e.what();
      }
    }
    if (progress) progress(k, grid.size(), row);
  }
  return table;
}

}  // namespace fsoqkd
