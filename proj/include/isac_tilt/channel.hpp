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

// Superposed monostatic echo for one steering direction and one slot:
//   s_R(t) = sum_k beta_k g_k s_T(t - tau_k) exp(j 2 pi f_D,k t) + n(t)
// where g_k is the one-way linear power gain (two passes through the antenna give g_k^2 in power).

#include "isac_tilt/antenna.hpp"
#include "isac_tilt/core.hpp"
#include "isac_tilt/rng.hpp"
#include "isac_tilt/scene.hpp"
#include "isac_tilt/waveform.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace isac_tilt
{

struct LinkBudget
{
  double transmit_power_w = 1000.0;
  double carrier_hz = 3.7e9;
  double path_loss_exponent = 1.785;
  double noise_figure_db = 5.0;
  double system_temperature_k = 290.0;
  double bandwidth_hz = 50e6;
  // true: the exponent applies to each leg, so power falls as r^(-2*exponent) over the round trip.
  bool exponent_per_leg = true;

  double wavelength_m() const { return speed_of_light / carrier_hz; }
  double round_trip_exponent() const { return exponent_per_leg ? 2.0 * path_loss_exponent : path_loss_exponent; }

  void validate() const
  {
    require(transmit_power_w > 0.0, "transmit power must be positive");
    require(carrier_hz > 0.0, "carrier frequency must be positive");
    require(path_loss_exponent > 0.0, "path-loss exponent must be positive");
    require(std::isfinite(noise_figure_db), "noise figure must be finite");
    require(system_temperature_k > 0.0, "system temperature must be positive");
    require(bandwidth_hz > 0.0, "bandwidth must be positive");
  }
};

// N_0 = k T_sys BW F_n.
inline double noise_power(const LinkBudget& lb) { return boltzmann * lb.system_temperature_k * lb.bandwidth_hz * db2lin(lb.noise_figure_db); }

/// Echo amplitude before antenna gain: |beta|^2 = P_t sigma (c / (4 pi f_c))^2 / (4 pi) r^(-n),
/// n the round-trip distance exponent (2 * 1.785 by default).
inline double path_amplitude(double range_m, double rcs_m2, const LinkBudget& lb)
{
  require(range_m > 0.0, "path_amplitude: range must be positive");
  require(rcs_m2 >= 0.0, "path_amplitude: RCS must be non-negative");
  const double k = lb.wavelength_m() / (4.0 * pi);
  const double power = lb.transmit_power_w * rcs_m2 * k * k / (4.0 * pi) * std::pow(range_m, -lb.round_trip_exponent());
  return std::sqrt(power);
}

// Monostatic Doppler for a radial velocity (positive = receding, which lowers the frequency).
inline double doppler_shift_hz(double radial_velocity_mps, double carrier_hz)
{
  return -2.0 * radial_velocity_mps * carrier_hz / speed_of_light;
}

struct EchoContribution
{
  int scatterer_id = 0;
  bool moving = false;
  cdouble amplitude;     // beta_k times the one-way linear gain
  double delay_s = 0.0;  // round-trip, from the start of the reference symbol
  double doppler_hz = 0.0;
  double range_m = 0.0;  // slant range
  double gain_db = 0.0;  // one-way
};

/// Per-scatterer echo parameters for one steering direction at wall-clock time `time_s`.
///
/// Elevation uses the horizontal range and the scatterer height; delay and spreading loss use the
/// slant range. Moving targets are points at their current position.
inline std::vector<EchoContribution> echo_contributions(const Scene& scene, double steering_azimuth_deg, const TiltState& tilt,
                                                        int scan_index, double time_s, const LinkBudget& lb)
{
  const BaseStation& bs = scene.base_station;
  const double h_bs = bs.height();
  std::vector<EchoContribution> out;
  out.reserve(scene.static_scatterers.size() + scene.moving_targets.size());

  auto gain_for = [&](double ground_range, double azimuth, double height) {
    const double eff = effective_elevation(elevation_angle(ground_range, h_bs, height), tilt, scan_index);
    return antenna_gain_db(boresight_elevation_offset(eff), azimuth - steering_azimuth_deg, bs.pattern);
  };

  for (const auto& s : scene.static_scatterers)
  {
    const double dh = h_bs - s.height_m;
    const double slant = std::hypot(s.range_m, dh);
    const double g_db = gain_for(s.range_m, s.azimuth_deg, s.height_m);
    const double rcs = s.rcs_m2(lb.wavelength_m());
    EchoContribution c;
    c.scatterer_id = s.id;
    c.amplitude = path_amplitude(slant, rcs, lb) * db2lin(g_db);
    c.delay_s = 2.0 * slant / speed_of_light;
    c.range_m = slant;
    c.gain_db = g_db;
    out.push_back(c);
  }

  for (const auto& m : scene.moving_targets)
  {
    const Vec3 pos = m.position_at(time_s);
    const Vec3 rel = pos - bs.position;
    const double ground = rel.horizontal_norm();
    const double slant = rel.norm();
    require(ground > 0.0, "moving target " + std::to_string(m.id) + " passes over the base station");
    const double az = rad2deg(std::atan2(rel.y, rel.x));
    const double g_db = gain_for(ground, az, pos.z);
    EchoContribution c;
    c.scatterer_id = m.id;
    c.moving = true;
    c.amplitude = path_amplitude(slant, m.rcs_m2, lb) * db2lin(g_db);
    c.delay_s = 2.0 * slant / speed_of_light;
    c.doppler_hz = doppler_shift_hz(radial_velocity(pos, m.velocity, bs.position), lb.carrier_hz);
    c.range_m = slant;
    c.gain_db = g_db;
    out.push_back(c);
  }
  return out;
}

// Precomputed delayed copies of a fixed waveform, looked up by exact delay. Only valid for the
// waveform (and transmit scale) it was built from.
struct DelayedEchoCache
{
  struct Entry
  {
    double delay_s = 0.0;
    std::ptrdiff_t first_index = 0;
    std::vector<cdouble> samples;
  };
  std::vector<Entry> entries;

  void add(const SensingWaveform& waveform, double delay_s, double scale)
  {
    if (find(delay_s))
      return;
    Entry e;
    e.delay_s = delay_s;
    e.samples = waveform.delayed(delay_s, e.first_index, scale);
    entries.push_back(std::move(e));
  }

  const Entry* find(double delay_s) const
  {
    for (const auto& e : entries)
      if (e.delay_s == delay_s)
        return &e;
    return nullptr;
  }
};

struct EchoRequest
{
  double reference_time_s = 0.0; // wall-clock start of the reference symbol
  std::uint64_t noise_seed = 0;
  bool add_noise = true;
  double noise_power_w = 0.0;
};

/// Received samples over the N_SR-symbol reception window, which starts one symbol after the
/// reference symbol start. Output sample i corresponds to absolute index N + i (N = symbol samples).
/// The waveform is transmitted with unit mean power.
inline BasebandSegment synthesize_echo(std::span<const EchoContribution> contributions, const SensingWaveform& waveform,
                                       const SlotPlan& plan, const EchoRequest& request, const DelayedEchoCache* cache = nullptr)
{
  const std::size_t n_sym = waveform.symbol_samples();
  const std::size_t n_rx = static_cast<std::size_t>(plan.sensing_symbols) * n_sym;
  const auto window_begin = static_cast<std::ptrdiff_t>(n_sym);
  const auto window_end = window_begin + static_cast<std::ptrdiff_t>(n_rx);
  const double fs = waveform.sample_rate_hz();
  const double tx_scale = 1.0 / std::sqrt(waveform.nominal_power());

  BasebandSegment rx;
  rx.samples.assign(n_rx, cdouble{});
  rx.sample_rate_hz = fs;
  rx.duration_s = static_cast<double>(plan.sensing_symbols) * plan.symbol_duration_s();

  for (const auto& c : contributions)
  {
    require(c.delay_s >= 0.0, "echo delay must be non-negative");
    std::ptrdiff_t first = 0;
    std::vector<cdouble> fresh;
    const std::vector<cdouble>* echo_ptr = nullptr;
    if (const auto* hit = cache ? cache->find(c.delay_s) : nullptr)
    {
      first = hit->first_index;
      echo_ptr = &hit->samples;
    }
    else
    {
      fresh = waveform.delayed(c.delay_s, first, tx_scale);
      echo_ptr = &fresh;
    }
    const auto& echo = *echo_ptr;
    const auto lo = std::max(first, window_begin);
    const auto hi = std::min(first + static_cast<std::ptrdiff_t>(echo.size()), window_end);
    for (auto n = lo; n < hi; ++n)
    {
      cdouble v = c.amplitude * echo[static_cast<std::size_t>(n - first)];
      if (c.doppler_hz != 0.0)
      {
        const double t = request.reference_time_s + static_cast<double>(n) / fs;
        const double cycles = std::fmod(c.doppler_hz * t, 1.0);
        v *= std::polar(1.0, 2.0 * pi * cycles);
      }
      rx.samples[static_cast<std::size_t>(n - window_begin)] += v;
    }
  }

  if (request.add_noise && request.noise_power_w > 0.0)
  {
    std::mt19937_64 engine(request.noise_seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(request.noise_power_w / 2.0));
    for (auto& v : rx.samples)
    {
      const double re = normal(engine);
      const double im = normal(engine);
      v += cdouble{re, im};
    }
  }
  return rx;
}

/// Convenience form: gathers contributions from the scene and synthesises the echo.
inline BasebandSegment synthesize_echo(const Scene& scene, double steering_azimuth_deg, const TiltState& tilt, int scan_index,
                                       const SensingWaveform& waveform, const SlotPlan& plan, const LinkBudget& lb,
                                       const EchoRequest& request)
{
  const auto contributions = echo_contributions(scene, steering_azimuth_deg, tilt, scan_index, request.reference_time_s, lb);
  return synthesize_echo(contributions, waveform, plan, request);
}

} // namespace isac_tilt
