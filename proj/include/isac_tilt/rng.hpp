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

// Seed derivation. Every random draw in a run is keyed by (master seed, stream, scan, azimuth,
// slot) so that rows of a scan can be produced in any order or concurrently.

#include <bit>
#include <cstdint>
#include <initializer_list>

namespace isac_tilt
{

enum class RngStream : std::uint64_t
{
  payload = 0x7061796cULL,
  noise = 0x6e6f6973ULL,
  sweep = 0x73776570ULL,
};

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
{
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t t : tags)
    h = splitmix64(h ^ splitmix64(t));
  return h;
}

inline std::uint64_t slot_seed(std::uint64_t master, RngStream stream, int scan, int azimuth, int slot)
{
  return derive_seed(master, {static_cast<std::uint64_t>(stream), static_cast<std::uint64_t>(scan),
                              static_cast<std::uint64_t>(azimuth), static_cast<std::uint64_t>(slot)});
}

// Tag for a real-valued key (e.g. a tilt offset) so that equal values always map to equal seeds.
inline std::uint64_t value_tag(double v) { return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v); }

} // namespace isac_tilt
