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

// Tilt-failure detection from scan-to-scan changes of the azimuth-averaged clutter profile.

#include "isac_tilt/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace isac_tilt
{

// One entry per range bin; empty where either profile is zero.
using MwrProfile = std::vector<std::optional<double>>;

/// Magnitude-weighted ratio between consecutive profiles:
///   eta(r) = m / (m + tau) * (P_k / P_{k-1} - 1),  m = max(|P_k|, |P_{k-1}|).
inline MwrProfile mwr_profile(std::span<const double> current, std::span<const double> previous, double regularizer)
{
  require(regularizer > 0.0, "mwr_profile: regularizer must be positive");
  require(current.size() == previous.size(), "mwr_profile: profile lengths differ");
  MwrProfile eta(current.size());
  for (std::size_t i = 0; i < current.size(); ++i)
  {
    const double a = std::abs(current[i]);
    const double b = std::abs(previous[i]);
    if (!(a > 0.0 && b > 0.0))
      continue;
    const double m = std::max(a, b);
    eta[i] = m / (m + regularizer) * (current[i] / previous[i] - 1.0);
  }
  return eta;
}

// Median of the strictly positive entries; 0 when there are none.
inline double estimate_noise_floor(std::span<const double> profile)
{
  std::vector<double> v;
  v.reserve(profile.size());
  for (double p : profile)
    if (p > 0.0)
      v.push_back(p);
  if (v.empty())
    return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1)
    return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

struct DetectorConfig
{
  double threshold = 0.01;           // gamma_det
  double min_fraction = 0.05;        // of valid bins
  double regularizer_floor_multiple = 10.0;
  std::optional<double> regularizer; // absolute tau; overrides the floor-based default

  void validate() const
  {
    require(threshold > 0.0, "detection threshold must be positive");
    require(min_fraction > 0.0 && min_fraction <= 1.0, "detection min_fraction must lie in (0, 1]");
    require(regularizer_floor_multiple > 0.0, "regularizer floor multiple must be positive");
    if (regularizer)
      require(*regularizer > 0.0, "regularizer must be positive");
  }

  // tau for a comparison against `reference`: explicit value, else a multiple of its noise floor.
  double regularizer_for(std::span<const double> reference) const
  {
    if (regularizer)
      return *regularizer;
    const double floor = estimate_noise_floor(reference);
    return floor > 0.0 ? regularizer_floor_multiple * floor : std::numeric_limits<double>::min();
  }
};

struct DetectionResult
{
  int scan_index = 0; // the later scan of the compared pair
  MwrProfile eta;
  std::size_t valid_bins = 0;
  std::size_t flagged_bins = 0;
  double flagged_fraction = 0.0;
  bool decision = false;
  double threshold = 0.0;
  double min_fraction = 0.0;
  double regularizer = 0.0;
};

/// Flags bins with |eta| > threshold; declares a failure when the flagged share of valid bins
/// reaches `min_fraction`.
inline DetectionResult detect_atf(MwrProfile eta, double threshold, double min_fraction, int scan_index = 0, double regularizer = 0.0)
{
  require(threshold > 0.0, "detect_atf: threshold must be positive");
  DetectionResult d;
  d.scan_index = scan_index;
  d.threshold = threshold;
  d.min_fraction = min_fraction;
  d.regularizer = regularizer;
  for (const auto& e : eta)
  {
    if (!e)
      continue;
    ++d.valid_bins;
    if (std::abs(*e) > threshold)
      ++d.flagged_bins;
  }
  d.flagged_fraction = d.valid_bins ? static_cast<double>(d.flagged_bins) / static_cast<double>(d.valid_bins) : 0.0;
  d.decision = d.valid_bins > 0 && d.flagged_fraction >= min_fraction;
  d.eta = std::move(eta);
  return d;
}

// Full detector step between the profiles of scans k-1 and k.
inline DetectionResult detect_between(std::span<const double> current, std::span<const double> previous, const DetectorConfig& cfg,
                                      int scan_index)
{
  cfg.validate();
  const double tau = cfg.regularizer_for(previous);
  return detect_atf(mwr_profile(current, previous, tau), cfg.threshold, cfg.min_fraction, scan_index, tau);
}

} // namespace isac_tilt
