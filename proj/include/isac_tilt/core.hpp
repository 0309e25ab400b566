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

// Physical constants, angle helpers and the exception hierarchy shared by all modules.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isac_tilt
{

using cdouble = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double boltzmann = 1.380649e-23;     // J/K
inline constexpr double pi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / pi; }

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

// Wraps an angle to [-180, 180).
inline double wrap_deg(double deg)
{
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0)
    w += 360.0;
  return w - 180.0;
}

// Base of everything this library throws on purpose.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (bad range, mismatched shapes, ...).
class PreconditionError : public Error
{
public:
  using Error::Error;
};

// Scenario configuration could not be parsed or validated. `key_path` names the offending key.
class ConfigError : public Error
{
public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what), key_path_(std::move(key_path))
  {
  }
  const std::string& key_path() const noexcept { return key_path_; }

private:
  std::string key_path_;
};

inline void require(bool condition, const std::string& message)
{
  if (!condition)
    throw PreconditionError(message);
}

} // namespace isac_tilt
