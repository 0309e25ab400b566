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

// Thin FFTW wrapper. Plans are created once per (size, direction, buffer alignment) under a mutex
// and then executed through the new-array interface, which FFTW guarantees to be thread-safe.
// Planning is FFTW_ESTIMATE only, so the chosen algorithm (and the rounding) never depends on timing.

#include "isac_tilt/core.hpp"

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace isac_tilt::fft
{

static_assert(sizeof(cdouble) == sizeof(fftw_complex), "std::complex<double> must match fftw_complex layout");

namespace detail
{
class PlanCache
{
public:
  static PlanCache& instance()
  {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign, int alignment)
  {
    std::lock_guard lock(mutex_);
    const Key key{n, sign, alignment};
    if (auto it = plans_.find(key); it != plans_.end())
      return it->second;
    // Scratch with the same alignment as the arrays the plan will run on.
    std::vector<char> scratch((n + 1) * sizeof(fftw_complex) + 64);
    auto addr = reinterpret_cast<std::uintptr_t>(scratch.data());
    while (fftw_alignment_of(reinterpret_cast<double*>(addr)) != alignment)
      addr += sizeof(double);
    auto* buf = reinterpret_cast<fftw_complex*>(addr);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    if (plan == nullptr)
      throw Error("FFTW failed to create a plan of size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

private:
  PlanCache() = default;
  ~PlanCache()
  {
    for (auto& [key, plan] : plans_)
      fftw_destroy_plan(plan);
  }

  using Key = std::tuple<std::size_t, int, int>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

inline void execute(std::span<cdouble> data, int sign)
{
  if (data.empty())
    return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = PlanCache::instance().get(data.size(), sign, fftw_alignment_of(reinterpret_cast<double*>(buf)));
  fftw_execute_dft(plan, buf, buf);
}
} // namespace detail

// In-place forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline void forward(std::span<cdouble> data) { detail::execute(data, FFTW_FORWARD); }

// In-place unnormalised inverse DFT, x[n] = sum_k X[k] exp(+j 2 pi k n / N).
inline void inverse(std::span<cdouble> data) { detail::execute(data, FFTW_BACKWARD); }

inline std::size_t next_pow2(std::size_t n)
{
  std::size_t p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

} // namespace isac_tilt::fft
