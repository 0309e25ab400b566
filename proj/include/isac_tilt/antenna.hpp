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

#include "isac_tilt/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace isac_tilt
{

// Parameters of the 3GPP parametric sector pattern (TR 38.901 style element).
struct PatternConfig
{
  double hpbw_elevation_deg = 6.0;
  double hpbw_azimuth_deg = 6.0;
  double max_gain_db = 21.0;
  double side_lobe_level_db = 30.0;  // elevation-cut clip (SLA_V)
  double front_back_ratio_db = 30.0; // azimuth-cut clip and overall floor (A_m)

  void validate() const
  {
    require(hpbw_elevation_deg > 0.0 && hpbw_elevation_deg < 180.0, "elevation HPBW must lie in (0, 180) deg");
    require(hpbw_azimuth_deg > 0.0 && hpbw_azimuth_deg < 180.0, "azimuth HPBW must lie in (0, 180) deg");
    require(std::isfinite(max_gain_db) && std::isfinite(side_lobe_level_db) && std::isfinite(front_back_ratio_db),
            "pattern gains must be finite");
    require(side_lobe_level_db >= 0.0 && front_back_ratio_db >= 0.0, "SLL and FBR are attenuations and must be >= 0 dB");
  }

  // Elevation offset at which the vertical cut reaches the side-lobe clip.
  double elevation_clip_onset_deg() const { return hpbw_elevation_deg * std::sqrt(side_lobe_level_db / 12.0); }
};

// Vertical-cut attenuation A_V in dB (<= 0).
inline double vertical_attenuation_db(double elevation_offset_deg, const PatternConfig& p)
{
  const double q = elevation_offset_deg / p.hpbw_elevation_deg;
  return -std::min(12.0 * q * q, p.side_lobe_level_db);
}

// Horizontal-cut attenuation A_H in dB (<= 0). The offset is wrapped to [-180, 180).
inline double horizontal_attenuation_db(double azimuth_offset_deg, const PatternConfig& p)
{
  const double q = wrap_deg(azimuth_offset_deg) / p.hpbw_azimuth_deg;
  return -std::min(12.0 * q * q, p.front_back_ratio_db);
}

/// One-way element gain in dB for an angular offset from boresight.
///
/// A(theta, phi) = -min{-(A_V + A_H), A_m} with A_m = front-back ratio, added to the peak gain.
/// Positive elevation offsets point below boresight (larger zenith angle).
inline double antenna_gain_db(double elevation_offset_deg, double azimuth_offset_deg, const PatternConfig& p)
{
  const double combined = -(vertical_attenuation_db(elevation_offset_deg, p) + horizontal_attenuation_db(azimuth_offset_deg, p));
  return p.max_gain_db - std::min(combined, p.front_back_ratio_db);
}

// Tabulated one-way elevation-cut gain on a uniform offset grid, used by the pattern-matching estimator.
class PatternLookup
{
public:
  PatternLookup() = default;

  PatternLookup(const PatternConfig& pattern, double step_deg = 0.01, double half_span_deg = 90.0)
      : step_deg_(step_deg), half_span_deg_(half_span_deg), max_gain_db_(pattern.max_gain_db),
        clip_onset_deg_(pattern.elevation_clip_onset_deg())
  {
    pattern.validate();
    require(step_deg > 0.0 && step_deg <= 0.01 + 1e-12, "pattern lookup step must be in (0, 0.01] deg");
    require(half_span_deg > 0.0, "pattern lookup span must be positive");
    const auto half = static_cast<std::ptrdiff_t>(std::llround(half_span_deg / step_deg));
    half_count_ = half;
    table_.resize(static_cast<std::size_t>(2 * half + 1));
    for (std::ptrdiff_t i = -half; i <= half; ++i)
      table_[static_cast<std::size_t>(i + half)] = antenna_gain_db(static_cast<double>(i) * step_deg, 0.0, pattern);
  }

  // Nearest-grid gain; offsets beyond the table are clamped to its edge.
  double gain_db(double elevation_offset_deg) const
  {
    auto i = static_cast<std::ptrdiff_t>(std::llround(elevation_offset_deg / step_deg_));
    i = std::clamp<std::ptrdiff_t>(i, -half_count_, half_count_);
    return table_[static_cast<std::size_t>(i + half_count_)];
  }

  double step_deg() const { return step_deg_; }
  double max_gain_db() const { return max_gain_db_; }
  double clip_onset_deg() const { return clip_onset_deg_; }
  double half_span_deg() const { return half_span_deg_; }
  std::size_t size() const { return table_.size(); }

  // Offset of table entry `index` (0 = most negative offset).
  double offset_at(std::size_t index) const { return (static_cast<double>(index) - static_cast<double>(half_count_)) * step_deg_; }
  double entry(std::size_t index) const { return table_.at(index); }

private:
  double step_deg_ = 0.01;
  double half_span_deg_ = 90.0;
  double max_gain_db_ = 0.0;
  double clip_onset_deg_ = 0.0;
  std::ptrdiff_t half_count_ = 0;
  std::vector<double> table_;
};

} // namespace isac_tilt
