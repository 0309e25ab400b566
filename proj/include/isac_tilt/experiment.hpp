// SPDX-License-Identifier: Apache-2.0
//
// isac-tilt: ISAC clutter heat map simulation and antenna tilt failure analysis
// Copyright (C) 2026 The isac-tilt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "isac_tilt/config.hpp"
#include "isac_tilt/detection.hpp"
#include "isac_tilt/estimation.hpp"
#include "isac_tilt/pipeline.hpp"
#include "isac_tilt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace isac_tilt
{

// Raised for failures during a run; carries the scan (and azimuth, when known) being processed.
class RunError : public Error
{
public:
  RunError(int scan, std::optional<int> azimuth, const std::string& what)
      : Error("scan " + std::to_string(scan) + (azimuth ? ", azimuth row " + std::to_string(*azimuth) : std::string()) + ": " + what),
        scan_(scan), azimuth_(azimuth)
  {
  }
  int scan() const noexcept { return scan_; }
  std::optional<int> azimuth() const noexcept { return azimuth_; }

private:
  int scan_;
  std::optional<int> azimuth_;
};

struct RunArtifacts
{
  LoadedConfig config;
  std::vector<ClutterHeatMap> instantaneous; // x_k, index k-1
  std::vector<ClutterHeatMap> smoothed;      // y_k
  std::vector<std::vector<double>> profiles; // azimuth average of y_k
  double range_bin_m = 0.0;
  std::vector<double> azimuth_deg;
  std::vector<DetectionResult> detections;      // pairs (k-1, k) for k = 2..N_s
  std::vector<EstimationReport> pattern_match;  // one per scan k >= 3
  std::vector<EstimationReport> transient;      // one per scan k >= fail scan
  int fail_scan = 0;                            // first detection, else the configured failure scan
  bool fail_scan_detected = false;
  std::optional<int> first_detection;

  int scans() const { return static_cast<int>(smoothed.size()); }

  // Estimates at the fail scan: the scan the estimators are designed for.
  const EstimationReport* pattern_match_at(int scan) const
  {
    for (const auto& r : pattern_match)
      if (r.scan_index == scan)
        return &r;
    return nullptr;
  }
  const EstimationReport* transient_at(int scan) const
  {
    for (const auto& r : transient)
      if (r.scan_index == scan)
        return &r;
    return nullptr;
  }
};

/// Detection on every consecutive scan pair, then both estimators. Needs `profiles`,
/// `range_bin_m` and `config` filled in.
inline void analyze_profiles(RunArtifacts& art)
{
  const ScenarioConfig& cfg = art.config.config;
  const int scans = art.scans();
  art.detections.clear();
  art.pattern_match.clear();
  art.transient.clear();
  art.first_detection.reset();
  for (int k = 2; k <= scans; ++k)
  {
    auto d = detect_between(art.profiles[static_cast<std::size_t>(k - 1)], art.profiles[static_cast<std::size_t>(k - 2)], cfg.detection, k);
    if (d.decision && !art.first_detection)
      art.first_detection = k;
    art.detections.push_back(std::move(d));
  }
  art.fail_scan_detected = art.first_detection.has_value();
  art.fail_scan = art.first_detection.value_or(cfg.failure_scan);

  const PatternLookup lookup(cfg.pattern, cfg.lookup_step_deg);
  const TiltGeometry geometry = cfg.tilt_geometry();
  if (cfg.rma_window >= 3)
  {
    for (int k = 3; k <= scans; ++k)
    {
      const auto i = static_cast<std::size_t>(k - 1);
      art.pattern_match.push_back(estimate_tilt_pattern_match(art.profiles[i], art.profiles[i - 1], art.profiles[i - 2], cfg.rma_window,
                                                              lookup, geometry, art.range_bin_m, k, cfg.pattern_match_options()));
    }
  }
  for (int k = art.fail_scan; k <= scans; ++k)
  {
    auto opts = cfg.transient_options();
    opts.scans_elapsed = k - art.fail_scan + 1;
    art.transient.push_back(estimate_tilt_transient(art.profiles, art.range_bin_m, cfg.rma_window, art.fail_scan, cfg.pattern, geometry, opts));
  }
}

using ProgressFn = std::function<void(int scan, int total)>;

/// Simulates every scan, smooths, and runs detection and both estimators.
inline RunArtifacts run_scenario(const LoadedConfig& loaded, const ProgressFn& progress = {})
{
  const ScenarioConfig& cfg = loaded.config;
  RunArtifacts art;
  art.config = loaded;

  const SectorScanner scanner(cfg.scene(), cfg.sensing_setup());
  const TiltState tilt = cfg.tilt();
  RmaState rma = RmaState::with_window(cfg.rma_window);

  for (int k = 1; k <= cfg.scans; ++k)
  {
    ClutterHeatMap x;
    try
    {
      x = scanner.scan_sector(k, tilt);
    }
    catch (const Error& e)
    {
      throw RunError(k, std::nullopt, e.what());
    }
    rma = rma_update(std::move(rma), x);
    art.instantaneous.push_back(std::move(x));
    art.smoothed.push_back(*rma.smoothed);
    art.profiles.push_back(azimuth_average(*rma.smoothed).power);
    if (progress)
      progress(k, cfg.scans);
  }
  art.range_bin_m = scanner.setup().range_bin_m();
  art.azimuth_deg = art.smoothed.front().azimuth_deg;

  analyze_profiles(art);
  return art;
}

inline RunArtifacts run_scenario(const ScenarioConfig& cfg) { return run_scenario(LoadedConfig{cfg, {}, {}, "programmatic"}); }

// The estimates reported for a run: both methods at the fail scan (method II after the configured
// number of elapsed scans).
struct RunEstimates
{
  std::optional<double> pattern_match_deg;
  std::optional<double> transient_deg;
};

inline RunEstimates headline_estimates(const RunArtifacts& art)
{
  RunEstimates e;
  if (const auto* r = art.pattern_match_at(art.fail_scan); r && r->available)
    e.pattern_match_deg = r->estimate_deg;
  const int k2 = art.fail_scan + art.config.config.transient_scans_elapsed - 1;
  if (const auto* r = art.transient_at(k2); r && r->available)
    e.transient_deg = r->estimate_deg;
  return e;
}

struct SweepRow
{
  double delta_theta_deg = 0.0;
  std::string method;
  WaveformKind waveform = WaveformKind::ofdm;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool available = false;
  double estimate_deg = std::numeric_limits<double>::quiet_NaN();
  double abs_error_deg = std::numeric_limits<double>::quiet_NaN();
  double pct_error = std::numeric_limits<double>::quiet_NaN();
  bool detected = false;
  int fail_scan = 0;
  std::string error; // per-cell failure message; the sweep keeps going
};

struct SweepSpec
{
  std::vector<double> delta_theta_deg;
  std::vector<WaveformKind> waveforms{WaveformKind::ofdm, WaveformKind::lfm};
  int replicates = 1;
  int parallel_cells = 1;
};

// Seed of one sweep cell, independent of the order in which cells are listed or run.
inline std::uint64_t sweep_cell_seed(std::uint64_t master, double delta_theta_deg, WaveformKind w, int replicate)
{
  return derive_seed(master, {static_cast<std::uint64_t>(RngStream::sweep), value_tag(delta_theta_deg), static_cast<std::uint64_t>(w),
                              static_cast<std::uint64_t>(replicate)});
}

/// One run per (delta, waveform, replicate). Rows are ordered by waveform, then delta as listed,
/// then replicate, then method (pattern_match before transient_model).
inline std::vector<SweepRow> sweep_tilt(const LoadedConfig& base, const SweepSpec& spec)
{
  require(!spec.delta_theta_deg.empty(), "sweep: the delta list must not be empty");
  require(!spec.waveforms.empty(), "sweep: at least one waveform is required");
  require(spec.replicates >= 1, "sweep: replicates must be >= 1");
  require(spec.parallel_cells >= 1, "sweep: parallel_cells must be >= 1");

  struct Cell
  {
    double delta;
    WaveformKind w;
    int rep;
  };
  std::vector<Cell> cells;
  for (auto w : spec.waveforms)
    for (double d : spec.delta_theta_deg)
      for (int r = 0; r < spec.replicates; ++r)
        cells.push_back({d, w, r});

  std::vector<std::vector<SweepRow>> results(cells.size());
  auto run_cell = [&](std::size_t i) {
    const Cell& c = cells[i];
    LoadedConfig lc = base;
    lc.config.waveform = c.w;
    lc.config.delta_theta_deg = c.delta;
    lc.config.seed = sweep_cell_seed(base.config.seed, c.delta, c.w, c.rep);
    lc.resolved["waveform"] = to_string(c.w);
    lc.resolved["failure"]["delta_theta_deg"] = c.delta;
    lc.resolved["seed"] = lc.config.seed;

    SweepRow proto;
    proto.delta_theta_deg = c.delta;
    proto.waveform = c.w;
    proto.replicate = c.rep;
    proto.seed = lc.config.seed;
    std::vector<SweepRow> rows;
    try
    {
      const auto art = run_scenario(lc);
      const auto est = headline_estimates(art);
      proto.detected = art.fail_scan_detected;
      proto.fail_scan = art.fail_scan;
      auto fill = [&](const char* method, std::optional<double> v) {
        SweepRow r = proto;
        r.method = method;
        if (v)
        {
          r.available = true;
          r.estimate_deg = *v;
          r.abs_error_deg = std::abs(*v - c.delta);
          r.pct_error = c.delta > 0.0 ? 100.0 * r.abs_error_deg / c.delta : std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(r);
      };
      fill("pattern_match", est.pattern_match_deg);
      fill("transient_model", est.transient_deg);
    }
    catch (const std::exception& e)
    {
      for (const char* m : {"pattern_match", "transient_model"})
      {
        SweepRow r = proto;
        r.method = m;
        r.error = e.what();
        rows.push_back(r);
      }
    }
    results[i] = std::move(rows);
  };

  const auto workers = static_cast<std::size_t>(std::min<int>(spec.parallel_cells, static_cast<int>(cells.size())));
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < cells.size(); ++i)
      run_cell(i);
  }
  else
  {
    std::mutex m;
    std::size_t next = 0;
    auto worker = [&] {
      while (true)
      {
        std::size_t i;
        {
          std::lock_guard lock(m);
          if (next >= cells.size())
            return;
          i = next++;
        }
        run_cell(i);
      }
    };
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < workers; ++t)
      jobs.push_back(std::async(std::launch::async, worker));
    for (auto& j : jobs)
      j.get();
  }

  std::vector<SweepRow> rows;
  for (auto& r : results)
    rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

/// Inclusive arithmetic grid, e.g. (0.5, 6, 0.5) -> 12 values. Values are computed as
/// start + i * step to avoid accumulating rounding.
inline std::vector<double> delta_grid(double start, double stop, double step)
{
  require(step > 0.0 && stop >= start, "delta grid needs step > 0 and stop >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = start + static_cast<double>(i) * step;
  return v;
}

} // namespace isac_tilt
