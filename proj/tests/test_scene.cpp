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

#include "isac_tilt/antenna.hpp"
#include "isac_tilt/config.hpp"
#include "isac_tilt/scene.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace isac_tilt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("elevation angle from the zenith", "[scene]")
{
  CHECK_THAT(elevation_angle(19.0, 60.0, 41.0), WithinAbs(135.0, 1e-12));
  CHECK_THAT(elevation_angle(1234.0, 25.0, 25.0), WithinAbs(90.0, 1e-12));
  // Scatterer 1: 90 + atan(19 / 5003.4) in degrees, written out independently.
  const double oracle = 90.0 + std::atan2(19.0, 5003.4) * 180.0 / 3.14159265358979323846;
  CHECK_THAT(elevation_angle(5003.4, 60.0, 41.0), WithinAbs(oracle, 1e-12));
  CHECK_THAT(elevation_angle(5003.4, 60.0, 41.0), WithinAbs(90.2176, 1e-3));
  CHECK(elevation_angle(10.0, 5.0, 30.0) < 90.0);
  CHECK_THROWS_AS(elevation_angle(0.0, 60.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(elevation_angle(-5.0, 60.0, 0.0), PreconditionError);
}

TEST_CASE("elevation is monotone in range", "[scene]")
{
  double prev_down = elevation_angle(10.0, 60.0, 0.0);
  double prev_up = elevation_angle(10.0, 10.0, 60.0);
  for (double r = 20.0; r < 20000.0; r *= 1.3)
  {
    const double down = elevation_angle(r, 60.0, 0.0);
    const double up = elevation_angle(r, 10.0, 60.0);
    CHECK(down < prev_down);
    CHECK(up > prev_up);
    CHECK(down > 0.0);
    CHECK(down < 180.0);
    prev_down = down;
    prev_up = up;
  }
}

TEST_CASE("effective elevation switches at the failure scan", "[scene]")
{
  const TiltState tilt{0.0, 4.0, 5};
  CHECK_THAT(effective_elevation(90.5, tilt, 5), WithinAbs(86.5, 1e-12));
  CHECK_THAT(effective_elevation(90.5, tilt, 9), WithinAbs(86.5, 1e-12));
  CHECK_THAT(effective_elevation(90.5, tilt, 4), WithinAbs(90.5, 1e-12));
  const TiltState none{2.0, 0.0, 1};
  CHECK_THAT(effective_elevation(91.0, none, 7), WithinAbs(89.0, 1e-12));
  CHECK_THROWS(TiltState{0.0, -1.0, 5}.validate());
  CHECK_THROWS(TiltState{0.0, 1.0, 0}.validate());
}

TEST_CASE("3GPP sector pattern", "[scene][antenna]")
{
  const PatternConfig p;
  CHECK_THAT(antenna_gain_db(0.0, 0.0, p), WithinAbs(21.0, 1e-12));
  CHECK_THAT(antenna_gain_db(3.0, 0.0, p), WithinAbs(18.0, 1e-12));
  CHECK_THAT(antenna_gain_db(0.0, 3.0, p), WithinAbs(18.0, 1e-12));
  CHECK_THAT(antenna_gain_db(30.0, 0.0, p), WithinAbs(-9.0, 1e-12));
  CHECK_THAT(antenna_gain_db(30.0, 30.0, p), WithinAbs(-9.0, 1e-12));
  // Combined attenuation: 12 (2/6)^2 * 2 = 2.667 dB.
  CHECK_THAT(antenna_gain_db(2.0, 2.0, p), WithinAbs(21.0 - 24.0 / 9.0, 1e-12));
  CHECK_THAT(p.elevation_clip_onset_deg(), WithinAbs(6.0 * std::sqrt(2.5), 1e-12));
}

TEST_CASE("pattern symmetry and clipping hold everywhere", "[scene][antenna]")
{
  PatternConfig p;
  p.side_lobe_level_db = 20.0;
  p.front_back_ratio_db = 30.0;
  for (double th = -90.0; th <= 90.0; th += 0.7)
  {
    for (double ph = -180.0; ph < 180.0; ph += 3.1)
    {
      const double g = antenna_gain_db(th, ph, p);
      CHECK(g <= p.max_gain_db);
      CHECK(g == antenna_gain_db(-th, ph, p));
      CHECK_THAT(g, WithinAbs(antenna_gain_db(th, -ph, p), 1e-12));
    }
    CHECK(p.max_gain_db - antenna_gain_db(th, 0.0, p) <= p.side_lobe_level_db + 1e-12);
    CHECK(p.max_gain_db - antenna_gain_db(0.0, 2.0 * th, p) <= p.front_back_ratio_db + 1e-12);
  }
  CHECK(antenna_gain_db(0.0, 0.0, p) > antenna_gain_db(0.01, 0.0, p));
  CHECK(antenna_gain_db(0.0, 0.0, p) > antenna_gain_db(0.0, 0.01, p));
}

TEST_CASE("pattern lookup is monotone down to the clip onset", "[scene][antenna]")
{
  const PatternConfig p;
  const PatternLookup lookup(p, 0.01);
  double prev = lookup.gain_db(0.0);
  for (double d = 0.01; d <= p.elevation_clip_onset_deg(); d += 0.01)
  {
    const double g = lookup.gain_db(d);
    CHECK(g <= prev);
    prev = g;
  }
  CHECK_THAT(lookup.gain_db(1.234), WithinAbs(antenna_gain_db(1.23, 0.0, p), 1e-12));
  CHECK_THROWS_AS(PatternLookup(p, 0.05), PreconditionError);
}

TEST_CASE("cylinder RCS", "[scene]")
{
  const double lambda = 299792458.0 / 3.7e9;
  CHECK_THAT(lambda, WithinRel(0.081025, 1e-4));
  CHECK_THAT(cylinder_rcs(15.0, 10.0, 0.081025), WithinRel(5.816e4, 0.01));
  const double base = cylinder_rcs(15.0, 10.0, lambda);
  CHECK_THAT(cylinder_rcs(15.0, 20.0, lambda), WithinRel(4.0 * base, 1e-12));
  CHECK_THAT(cylinder_rcs(30.0, 10.0, lambda), WithinRel(2.0 * base, 1e-12));
  // Homogeneity: (a d, b h, c lambda) -> a b^2 / c.
  CHECK_THAT(cylinder_rcs(1.5 * 15.0, 0.7 * 10.0, 2.0 * lambda), WithinRel(base * 1.5 * 0.49 / 2.0, 1e-12));
  CHECK_THROWS(cylinder_rcs(0.0, 1.0, 1.0));
  CHECK_THROWS(cylinder_rcs(1.0, -1.0, 1.0));
  CHECK_THROWS(cylinder_rcs(1.0, 1.0, 0.0));
}

TEST_CASE("radial velocity", "[scene]")
{
  const Vec3 bs{0.0, 0.0, 60.0};
  const Vec3 pos{3000.0, 4000.0, 60.0};
  CHECK_THAT(radial_velocity(pos, Vec3{-4.0, 3.0, 0.0}, bs), WithinAbs(0.0, 1e-12));
  CHECK_THAT(radial_velocity(pos, Vec3{12.0 * 0.6, 12.0 * 0.8, 0.0}, bs), WithinAbs(12.0, 1e-12));
  CHECK_THAT(radial_velocity(pos, Vec3{-6.0, -8.0, 0.0}, bs), WithinAbs(-10.0, 1e-12));
  CHECK_THROWS(radial_velocity(bs, Vec3{1.0, 0.0, 0.0}, bs));

  // Moving target 10 at scan start, plain-array dot product.
  const auto t10 = reference_moving_targets().front().to_target();
  const double az = 47.3 * 3.14159265358979323846 / 180.0;
  const double p[3] = {7095.3 * std::cos(az), 7095.3 * std::sin(az), -60.0};
  const double v[3] = {10.32, 6.14, 0.0};
  const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  const double oracle = (p[0] * v[0] + p[1] * v[1] + p[2] * v[2]) / n;
  CHECK_THAT(radial_velocity(t10.initial_position, t10.velocity, bs), WithinAbs(oracle, 1e-9));
  CHECK(oracle > 0.0);
}

TEST_CASE("scene validation", "[scene]")
{
  StaticScatterer s{1, 100.0, 10.0, 5.0, 0.0, std::nullopt};
  CHECK_THROWS(s.validate());
  s.rcs_override_m2 = 10.0;
  CHECK_NOTHROW(s.validate());
  s.range_m = 0.0;
  CHECK_THROWS(s.validate());

  BaseStation bs;
  CHECK_NOTHROW(bs.validate());
  bs.boresight_azimuth_deg = 360.0;
  CHECK_THROWS(bs.validate());
  bs.boresight_azimuth_deg = 45.0;
  bs.position.z = 0.0;
  CHECK_THROWS(bs.validate());
  bs.position.z = 60.0;
  bs.pattern.hpbw_elevation_deg = 180.0;
  CHECK_THROWS(bs.validate());

  MovingTarget m{1, {}, {}, 0.0};
  CHECK_THROWS(m.validate());
  for (const auto& r : reference_static_scatterers())
    CHECK_NOTHROW(r.validate());
}
