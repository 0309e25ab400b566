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

// Scene geometry: base station, scatterers, tilt state, and the angle/RCS helpers that map a
// scene point onto the quantities the echo model needs.

#include "isac_tilt/antenna.hpp"
#include "isac_tilt/core.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace isac_tilt
{

struct Vec3
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  double horizontal_norm() const { return std::hypot(x, y); }
};

// Azimuth is measured counter-clockwise from +x, in degrees.
inline Vec3 from_range_azimuth(double ground_range_m, double azimuth_deg, double z_m)
{
  const double a = deg2rad(azimuth_deg);
  return {ground_range_m * std::cos(a), ground_range_m * std::sin(a), z_m};
}

struct BaseStation
{
  Vec3 position{0.0, 0.0, 60.0};
  double boresight_azimuth_deg = 45.0;
  double nominal_downtilt_deg = 0.0;
  PatternConfig pattern;
  // Array size is carried as metadata; the beam is modelled by the pattern HPBWs.
  int elements_horizontal = 16;
  int elements_vertical = 12;

  double height() const { return position.z; }

  void validate() const
  {
    require(position.z > 0.0, "base station height must be positive");
    require(boresight_azimuth_deg >= 0.0 && boresight_azimuth_deg < 360.0, "boresight azimuth must lie in [0, 360) deg");
    require(std::isfinite(nominal_downtilt_deg), "nominal downtilt must be finite");
    require(elements_horizontal > 0 && elements_vertical > 0, "element counts must be positive");
    pattern.validate();
  }
};

struct StaticScatterer
{
  int id = 0;
  double range_m = 0.0; // horizontal distance from the base station
  double azimuth_deg = 0.0;
  double diameter_m = 0.0;
  double height_m = 0.0;
  // Replaces the cylinder RCS when set (needed for zero-height point reflectors).
  std::optional<double> rcs_override_m2;

  void validate() const
  {
    require(range_m > 0.0, "static scatterer " + std::to_string(id) + ": range must be positive");
    require(diameter_m > 0.0, "static scatterer " + std::to_string(id) + ": diameter must be positive");
    require(height_m >= 0.0, "static scatterer " + std::to_string(id) + ": height must be non-negative");
    if (rcs_override_m2)
      require(*rcs_override_m2 > 0.0, "static scatterer " + std::to_string(id) + ": RCS override must be positive");
    else
      require(height_m > 0.0, "static scatterer " + std::to_string(id) + ": zero height needs an explicit RCS");
  }

  double rcs_m2(double wavelength_m) const;
};

struct MovingTarget
{
  int id = 0;
  Vec3 initial_position;
  Vec3 velocity; // m/s
  double rcs_m2 = 1.0;

  Vec3 position_at(double time_s) const { return initial_position + time_s * velocity; }

  void validate() const { require(rcs_m2 > 0.0, "moving target " + std::to_string(id) + ": RCS must be positive"); }
};

// Nominal downtilt plus an offset that switches on at a given scan (1-based).
struct TiltState
{
  double nominal_deg = 0.0;
  double offset_deg = 0.0;
  int active_from_scan = 1;

  bool failure_active(int scan_index) const { return scan_index >= active_from_scan; }
  double total_downtilt_deg(int scan_index) const { return nominal_deg + (failure_active(scan_index) ? offset_deg : 0.0); }

  void validate() const
  {
    require(offset_deg >= 0.0, "tilt offset must be non-negative");
    require(active_from_scan >= 1, "failure scan index must be >= 1");
  }
};

struct Scene
{
  BaseStation base_station;
  std::vector<StaticScatterer> static_scatterers;
  std::vector<MovingTarget> moving_targets;

  void validate() const
  {
    base_station.validate();
    for (const auto& s : static_scatterers)
      s.validate();
    for (const auto& m : moving_targets)
      m.validate();
  }
};

/// Geometric elevation of a point seen from the base station, measured from the zenith:
/// 90 deg + atan((h_bs - h_s) / r). Above 90 deg means below the horizon.
inline double elevation_angle(double range_m, double bs_height_m, double scatterer_height_m)
{
  require(range_m > 0.0, "elevation_angle: range must be positive");
  return 90.0 + rad2deg(std::atan((bs_height_m - scatterer_height_m) / range_m));
}

// Zenith-referenced elevation minus the downtilt in force at `scan_index`.
inline double effective_elevation(double geometric_elevation_deg, const TiltState& tilt, int scan_index)
{
  return geometric_elevation_deg - tilt.total_downtilt_deg(scan_index);
}

// Offset from the beam axis, which sits at 90 deg (horizon) before any downtilt is applied.
inline double boresight_elevation_offset(double effective_elevation_deg) { return effective_elevation_deg - 90.0; }

/// Broadside RCS of a conducting cylinder: 2*pi*a*h^2 / lambda with radius a = d/2.
inline double cylinder_rcs(double diameter_m, double height_m, double wavelength_m)
{
  require(diameter_m > 0.0 && height_m > 0.0 && wavelength_m > 0.0, "cylinder_rcs: inputs must be positive");
  return 2.0 * pi * (diameter_m / 2.0) * height_m * height_m / wavelength_m;
}

inline double StaticScatterer::rcs_m2(double wavelength_m) const
{
  return rcs_override_m2 ? *rcs_override_m2 : cylinder_rcs(diameter_m, height_m, wavelength_m);
}

// Signed velocity along the base-station-to-target line of sight; positive means receding.
inline double radial_velocity(Vec3 target_position, Vec3 target_velocity, Vec3 bs_position)
{
  const Vec3 los = target_position - bs_position;
  const double r = los.norm();
  require(r > 0.0, "radial_velocity: target coincides with the base station");
  return target_velocity.dot(los) / r;
}

} // namespace isac_tilt
