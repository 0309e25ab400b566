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

// Tilt-offset estimation from smoothed clutter profiles.
//
// Pattern matching (method I) undoes the recursive average to recover the instantaneous
// contributions of two consecutive scans, converts their dB difference to a one-way gain loss, and
// looks up the tilt that produces that loss from the beam peak.
//
// Transient fitting (method II) keeps the smoothed data and instead predicts how the averaged
// ratio responds to a step change of the pattern gain, then grid-searches the tilt.

#include "isac_tilt/antenna.hpp"
#include "isac_tilt/core.hpp"
#include "isac_tilt/detection.hpp"
#include "isac_tilt/pipeline.hpp"
#include "isac_tilt/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace isac_tilt
{

/// Exact inverse of one RMA step: x_k = (y_k - alpha y_{k-1}) / (1 - alpha).
/// Negative results (possible under noise) are passed through.
inline std::vector<double> invert_rma(std::span<const double> current, std::span<const double> previous, double alpha)
{
  require(alpha >= 0.0 && alpha < 1.0, "invert_rma: forgetting factor must lie in [0, 1)");
  require(current.size() == previous.size(), "invert_rma: shape mismatch");
  std::vector<double> x(current.size());
  const double g = 1.0 - alpha;
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = (current[i] - alpha * previous[i]) / g;
  return x;
}

struct PeakParams
{
  double min_height_db = 10.0;         // above the profile median
  double max_dynamic_range_db = 25.0;  // below the strongest peak
  std::size_t min_separation_bins = 10;
  std::size_t max_peaks = 16;

  void validate() const
  {
    require(min_height_db >= 0.0, "peak min_height_db must be >= 0");
    require(max_dynamic_range_db > 0.0, "peak max_dynamic_range_db must be positive");
    require(min_separation_bins >= 1, "peak min_separation_bins must be >= 1");
    require(max_peaks >= 1, "peak max_peaks must be >= 1");
  }
};

/// Local maxima of a power profile, strongest first.
///
/// A bin qualifies when it is strictly above its left neighbour, not below its right neighbour,
/// at least `min_height_db` above the median of the positive entries and within
/// `max_dynamic_range_db` of the strongest qualifying bin. Candidates are accepted greedily by
/// power (ties: lower index first) and must be `min_separation_bins` away from every accepted peak.
inline std::vector<std::size_t> select_peaks(std::span<const double> profile, const PeakParams& params = {})
{
  params.validate();
  require(!profile.empty(), "select_peaks: empty profile");
  const double median = estimate_noise_floor(profile);
  if (!(median > 0.0))
    return {};
  const double floor = median * db2lin(params.min_height_db);

  std::vector<std::size_t> cand;
  const std::size_t n = profile.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    const double p = profile[i];
    const bool left_ok = i == 0 || p > profile[i - 1];
    const bool right_ok = i + 1 == n || p >= profile[i + 1];
    if (left_ok && right_ok && p >= floor)
      cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return profile[a] > profile[b]; });
  if (cand.empty())
    return {};
  const double strongest = profile[cand.front()];
  const double range_floor = strongest / db2lin(params.max_dynamic_range_db);

  std::vector<std::size_t> peaks;
  for (std::size_t c : cand)
  {
    if (peaks.size() >= params.max_peaks || profile[c] < range_floor)
      break;
    const bool clear = std::all_of(peaks.begin(), peaks.end(), [&](std::size_t p) {
      const std::size_t d = p > c ? p - c : c - p;
      return d >= params.min_separation_bins;
    });
    if (clear)
      peaks.push_back(c);
  }
  return peaks;
}

enum class ElevationSource
{
  anchors,        // match peak ranges to known anchor heights, ground level otherwise
  bs_height_only, // 180 deg - atan(r / h_bs): every reflector at ground level
};

enum class GainLaw
{
  one_way, // rho = |G(theta - delta)|^2 / |G(theta)|^2 with G an amplitude pattern
  two_way, // square of the above; matches the round-trip power of the echo model
};

inline std::string to_string(ElevationSource s) { return s == ElevationSource::anchors ? "anchors" : "bs_height_only"; }
inline std::string to_string(GainLaw g) { return g == GainLaw::one_way ? "one_way" : "two_way"; }

struct AnchorPoint
{
  double range_m = 0.0;
  double height_m = 0.0;
};

// What the estimators know about the site: mast height, nominal downtilt, and optional anchors.
struct TiltGeometry
{
  double bs_height_m = 60.0;
  double nominal_downtilt_deg = 0.0;
  std::vector<AnchorPoint> anchors;
  double anchor_tolerance_m = 25.0;

  // Zenith-referenced geometric elevation of a reflector at range `range_m`.
  double elevation_deg(double range_m, ElevationSource source) const
  {
    require(range_m > 0.0, "elevation: range must be positive");
    if (source == ElevationSource::anchors)
    {
      const AnchorPoint* best = nullptr;
      double best_d = anchor_tolerance_m;
      for (const auto& a : anchors)
      {
        const double d = std::abs(std::hypot(a.range_m, bs_height_m - a.height_m) - range_m);
        if (d <= best_d)
        {
          best_d = d;
          best = &a;
        }
      }
      if (best)
        return elevation_angle(best->range_m, bs_height_m, best->height_m);
    }
    return 180.0 - rad2deg(std::atan(range_m / bs_height_m));
  }

  // Elevation offset from the nominal beam axis before any failure.
  double nominal_offset_deg(double range_m, ElevationSource source) const
  {
    return elevation_deg(range_m, source) - 90.0 - nominal_downtilt_deg;
  }
};

enum class EstimationMethod
{
  pattern_match,
  transient_model,
};

inline std::string to_string(EstimationMethod m) { return m == EstimationMethod::pattern_match ? "pattern_match" : "transient_model"; }

struct CostSample
{
  double delta_deg = 0.0;
  double cost = 0.0;
};

struct EstimationReport
{
  EstimationMethod method = EstimationMethod::pattern_match;
  int scan_index = 0;
  bool available = false;
  std::string reason;
  double estimate_deg = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> peaks;
  std::vector<double> peak_ranges_m;
  std::vector<double> peak_observations; // method I: one-way gain loss dB; method II: observed log-ratio dB
  std::vector<double> candidates_deg;    // method I per-peak estimates
  std::vector<CostSample> cost_curve;    // method II grid
  double cost_at_estimate = std::numeric_limits<double>::quiet_NaN();
};

struct PatternMatchOptions
{
  PeakParams peaks;
  ElevationSource elevation = ElevationSource::anchors;
  double trim_fraction = 0.0; // dropped from each end before averaging the per-peak estimates

  void validate() const
  {
    peaks.validate();
    require(trim_fraction >= 0.0 && trim_fraction < 0.5, "trim_fraction must lie in [0, 0.5)");
  }
};

inline double trimmed_mean(std::vector<double> v, double trim_fraction)
{
  require(!v.empty(), "trimmed_mean: empty input");
  std::sort(v.begin(), v.end());
  const auto cut = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(v.size())));
  const auto begin = v.begin() + static_cast<std::ptrdiff_t>(cut);
  const auto end = v.end() - static_cast<std::ptrdiff_t>(cut);
  return std::accumulate(begin, end, 0.0) / static_cast<double>(end - begin);
}

/// Smallest delta in [0, clip onset) whose looked-up gain at (offset - delta) is closest to
/// max_gain - loss_db.
inline double pattern_match_candidate(double nominal_offset_deg, double loss_db, const PatternLookup& lookup)
{
  const double target = lookup.max_gain_db() - loss_db;
  const double step = lookup.step_deg();
  const auto count = static_cast<std::size_t>(std::ceil(lookup.clip_onset_deg() / step - 1e-9));
  double best_delta = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i)
  {
    const double delta = static_cast<double>(i) * step;
    const double err = std::abs(lookup.gain_db(nominal_offset_deg - delta) - target);
    if (err < best_err)
    {
      best_err = err;
      best_delta = delta;
    }
  }
  return best_delta;
}

/// Method I on three consecutive smoothed profiles (scans k-2, k-1, k), k >= 3.
inline EstimationReport estimate_tilt_pattern_match(std::span<const double> y_k, std::span<const double> y_k1, std::span<const double> y_k2,
                                                    int window_scans, const PatternLookup& lookup, const TiltGeometry& geometry,
                                                    double bin_spacing_m, int scan_index, const PatternMatchOptions& options = {})
{
  require(scan_index >= 3, "pattern matching needs scan index >= 3");
  require(window_scans >= 3, "pattern matching needs an RMA window of at least 3 scans");
  require(bin_spacing_m > 0.0, "bin spacing must be positive");
  options.validate();
  const double alpha = forgetting_factor(window_scans);
  const auto x_prev = invert_rma(y_k1, y_k2, alpha);
  const auto x_cur = invert_rma(y_k, y_k1, alpha);

  EstimationReport rep;
  rep.method = EstimationMethod::pattern_match;
  rep.scan_index = scan_index;

  for (std::size_t i : select_peaks(x_prev, options.peaks))
  {
    if (!(x_prev[i] > 0.0 && x_cur[i] > 0.0) || i == 0)
      continue;
    const double loss = std::abs(lin2db(x_cur[i]) - lin2db(x_prev[i])) / 2.0;
    const double r = bin_spacing_m * static_cast<double>(i);
    rep.peaks.push_back(i);
    rep.peak_ranges_m.push_back(r);
    rep.peak_observations.push_back(loss);
    rep.candidates_deg.push_back(pattern_match_candidate(geometry.nominal_offset_deg(r, options.elevation), loss, lookup));
  }
  if (rep.candidates_deg.empty())
  {
    rep.reason = "no usable peaks in the recovered instantaneous profile";
    return rep;
  }
  rep.estimate_deg = trimmed_mean(rep.candidates_deg, options.trim_fraction);
  rep.available = true;
  return rep;
}

// rho + (1 - rho) alpha^k: the smoothed ratio k scans after a step from 1 to rho.
inline double transient_ratio(double rho, double alpha, int scans_elapsed)
{
  require(scans_elapsed >= 1, "transient ratio needs at least one elapsed scan");
  return rho + (1.0 - rho) * std::pow(alpha, scans_elapsed);
}

// Power ratio of the pattern after and before a tilt of `delta_deg` at a given nominal offset.
inline double tilt_gain_ratio(double delta_deg, double nominal_offset_deg, const PatternConfig& pattern, GainLaw law)
{
  const double d_db = antenna_gain_db(nominal_offset_deg - delta_deg, 0.0, pattern) - antenna_gain_db(nominal_offset_deg, 0.0, pattern);
  return db2lin(law == GainLaw::two_way ? 2.0 * d_db : d_db);
}

/// Predicted smoothed ratio for a candidate tilt at range `range_m`.
inline double predicted_ratio(double delta_deg, double range_m, const TiltGeometry& geometry, const PatternConfig& pattern, double alpha,
                              int scans_elapsed, GainLaw law = GainLaw::two_way, ElevationSource source = ElevationSource::bs_height_only)
{
  const double rho = tilt_gain_ratio(delta_deg, geometry.nominal_offset_deg(range_m, source), pattern, law);
  return transient_ratio(rho, alpha, scans_elapsed);
}

struct TransientOptions
{
  PeakParams peaks;
  double grid_max_deg = 10.0;
  double grid_step_deg = 0.1;
  GainLaw gain_law = GainLaw::two_way;
  ElevationSource elevation = ElevationSource::bs_height_only;
  int scans_elapsed = 1; // observed scan = fail scan + scans_elapsed - 1

  void validate() const
  {
    peaks.validate();
    require(grid_step_deg > 0.0 && grid_max_deg >= grid_step_deg, "transient grid must have positive step and extent");
    require(scans_elapsed >= 1, "scans_elapsed must be >= 1");
  }
};

/// Cost sum over peaks of (L_obs - 10 log10 R_pred(delta))^2.
inline double transient_cost(double delta_deg, std::span<const double> observed_db, std::span<const double> nominal_offsets_deg,
                             const PatternConfig& pattern, double alpha, const TransientOptions& options)
{
  double j = 0.0;
  for (std::size_t i = 0; i < observed_db.size(); ++i)
  {
    const double rho = tilt_gain_ratio(delta_deg, nominal_offsets_deg[i], pattern, options.gain_law);
    const double e = observed_db[i] - lin2db(transient_ratio(rho, alpha, options.scans_elapsed));
    j += e * e;
  }
  return j;
}

/// Method II over a stack of smoothed, azimuth-averaged profiles. `profiles[i]` is scan i + 1;
/// `fail_scan` is the first scan carrying the failure (>= 2).
inline EstimationReport estimate_tilt_transient(std::span<const std::vector<double>> profiles, double bin_spacing_m, int window_scans,
                                                int fail_scan, const PatternConfig& pattern, const TiltGeometry& geometry,
                                                const TransientOptions& options = {})
{
  options.validate();
  require(fail_scan >= 2, "transient estimation needs at least one pre-failure scan");
  const int observed_scan = fail_scan + options.scans_elapsed - 1;
  require(static_cast<std::size_t>(observed_scan) <= profiles.size(), "transient estimation: observed scan missing from the stack");
  require(bin_spacing_m > 0.0, "bin spacing must be positive");
  const double alpha = forgetting_factor(window_scans);
  const std::size_t n = profiles.front().size();
  for (const auto& p : profiles)
    require(p.size() == n, "transient estimation: profile lengths differ");

  std::vector<double> baseline(n, 0.0);
  for (int s = 1; s < fail_scan; ++s)
    for (std::size_t i = 0; i < n; ++i)
      baseline[i] += profiles[static_cast<std::size_t>(s - 1)][i];
  for (auto& v : baseline)
    v /= static_cast<double>(fail_scan - 1);
  const auto& observed = profiles[static_cast<std::size_t>(observed_scan - 1)];

  EstimationReport rep;
  rep.method = EstimationMethod::transient_model;
  rep.scan_index = observed_scan;

  std::vector<double> offsets;
  for (std::size_t i : select_peaks(baseline, options.peaks))
  {
    if (!(baseline[i] > 0.0 && observed[i] > 0.0) || i == 0)
      continue;
    const double r = bin_spacing_m * static_cast<double>(i);
    rep.peaks.push_back(i);
    rep.peak_ranges_m.push_back(r);
    rep.peak_observations.push_back(lin2db(observed[i] / baseline[i]));
    offsets.push_back(geometry.nominal_offset_deg(r, options.elevation));
  }
  if (rep.peaks.empty())
  {
    rep.reason = "no usable peaks in the pre-failure baseline";
    return rep;
  }

  const auto steps = static_cast<std::size_t>(std::floor(options.grid_max_deg / options.grid_step_deg + 1e-9));
  rep.cost_curve.reserve(steps + 1);
  std::size_t best = 0;
  for (std::size_t s = 0; s <= steps; ++s)
  {
    const double d = static_cast<double>(s) * options.grid_step_deg;
    const double j = transient_cost(d, rep.peak_observations, offsets, pattern, alpha, options);
    rep.cost_curve.push_back({d, j});
    if (j < rep.cost_curve[best].cost)
      best = s;
  }

  double estimate = rep.cost_curve[best].delta_deg;
  double cost = rep.cost_curve[best].cost;
  if (best > 0 && best < steps)
  {
    const double jm = rep.cost_curve[best - 1].cost;
    const double j0 = rep.cost_curve[best].cost;
    const double jp = rep.cost_curve[best + 1].cost;
    const double curvature = jp - 2.0 * j0 + jm;
    if (curvature > 0.0)
    {
      const double h = options.grid_step_deg;
      const double vertex = std::clamp(estimate - 0.5 * h * (jp - jm) / curvature, estimate - h, estimate + h);
      const double jv = transient_cost(vertex, rep.peak_observations, offsets, pattern, alpha, options);
      if (jv <= j0)
      {
        estimate = vertex;
        cost = jv;
      }
    }
  }
  rep.estimate_deg = estimate;
  rep.cost_at_estimate = cost;
  rep.available = true;
  return rep;
}

} // namespace isac_tilt
