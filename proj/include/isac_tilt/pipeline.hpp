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

// Matched filtering, slot averaging, sector scanning and the recursive moving average that turns
// instantaneous clutter heat maps into the smoothed maps used for monitoring.

#include "isac_tilt/channel.hpp"
#include "isac_tilt/core.hpp"
#include "isac_tilt/fft.hpp"
#include "isac_tilt/rng.hpp"
#include "isac_tilt/scene.hpp"
#include "isac_tilt/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace isac_tilt
{

/// Correlator r(i) = sum_n ref[n] conj(rx[n + i]) for integer lags i = 0..lags-1, with rx taken
/// as zero past its end. The reference spectrum is computed once per instance.
class MatchedFilter
{
public:
  MatchedFilter(std::span<const cdouble> ref, std::size_t rx_length, std::size_t lag_count)
      : ref_length_(ref.size()), rx_length_(rx_length), lag_count_(lag_count)
  {
    require(!ref.empty(), "matched filter: empty reference");
    require(rx_length >= ref.size(), "matched filter: received segment shorter than the reference");
    require(lag_count >= 1, "matched filter: need at least one lag");
    size_ = fft::next_pow2(std::max(rx_length, ref.size() + lag_count - 1));
    ref_spectrum_.assign(size_, cdouble{});
    std::copy(ref.begin(), ref.end(), ref_spectrum_.begin());
    fft::forward(ref_spectrum_);
    for (auto& v : ref_spectrum_)
      v = std::conj(v);
  }

  std::vector<cdouble> apply(std::span<const cdouble> rx) const
  {
    require(rx.size() == rx_length_, "matched filter: received length differs from the planned length");
    std::vector<cdouble> buf(size_);
    std::copy(rx.begin(), rx.end(), buf.begin());
    fft::forward(buf);
    for (std::size_t i = 0; i < size_; ++i)
      buf[i] *= ref_spectrum_[i];
    fft::inverse(buf);
    std::vector<cdouble> out(lag_count_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < lag_count_; ++i)
      out[i] = std::conj(buf[i]) * scale;
    return out;
  }

  std::size_t lag_count() const { return lag_count_; }

private:
  std::size_t ref_length_;
  std::size_t rx_length_;
  std::size_t lag_count_;
  std::size_t size_ = 0;
  std::vector<cdouble> ref_spectrum_;
};

/// Cross-correlation of a reference with a received buffer indexed from the reference start.
/// `lag_count` defaults to the full-overlap lags rx.size() - ref.size() + 1.
inline std::vector<cdouble> matched_filter(const BasebandSegment& ref, const BasebandSegment& rx, std::size_t lag_count = 0)
{
  require(ref.sample_rate_hz == rx.sample_rate_hz, "matched filter: sample rates differ");
  require(rx.size() >= ref.size(), "matched filter: received segment shorter than the reference");
  if (lag_count == 0)
    lag_count = rx.size() - ref.size() + 1;
  return MatchedFilter(ref.samples, rx.size(), lag_count).apply(rx.samples);
}

// R_max = c N_SR dT_s / 2.
inline double max_range(Numerology num, int sensing_symbols)
{
  require(sensing_symbols >= 1, "max_range: need at least one reception symbol");
  return speed_of_light * sensing_symbols * num.symbol_duration_s() / 2.0;
}

// Expected |r|^2 of pure noise at any lag: N_0 times the reference energy.
inline double matched_filter_noise_floor(double noise_power_w, const BasebandSegment& ref) { return noise_power_w * ref.energy(); }

struct RangeProfile
{
  std::vector<double> power;
  double bin_spacing_m = 0.0; // c / (2 fs)

  std::size_t size() const { return power.size(); }
  double range_at(std::size_t bin) const { return bin_spacing_m * static_cast<double>(bin); }
  std::vector<double> range_axis() const
  {
    std::vector<double> r(power.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = range_at(i);
    return r;
  }
};

// Row-major azimuth x range power grid.
struct ClutterHeatMap
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> power;
  std::vector<double> azimuth_deg;
  double bin_spacing_m = 0.0;
  int scan_index = 0;

  double& at(std::size_t row, std::size_t col) { return power[row * cols + col]; }
  double at(std::size_t row, std::size_t col) const { return power[row * cols + col]; }
  std::span<const double> row(std::size_t r) const { return {power.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {power.data() + r * cols, cols}; }
  bool same_shape(const ClutterHeatMap& o) const { return rows == o.rows && cols == o.cols; }
};

// Everything the sensing chain needs besides the scene and the tilt state.
struct SensingSetup
{
  SlotPlan plan;
  double sample_rate_hz = 61.44e6;
  double bandwidth_hz = 50e6;
  LinkBudget link;
  int azimuth_bins = 45;
  double azimuth_resolution_deg = 1.0;
  bool add_noise = true;
  bool centered_subcarriers = false;
  std::uint64_t seed = 1;
  int threads = 1;

  Numerology numerology() const { return plan.numerology; }
  std::size_t symbol_samples() const { return samples_per_symbol(plan.numerology, sample_rate_hz); }
  std::size_t range_bins() const { return static_cast<std::size_t>(plan.sensing_symbols) * symbol_samples(); }
  double range_bin_m() const { return speed_of_light / (2.0 * sample_rate_hz); }
  double sector_width_deg() const { return azimuth_bins * azimuth_resolution_deg; }
  double scan_duration_s() const { return azimuth_bins * plan.frame_duration_s(); }

  // Bin centres covering [boresight - width/2, boresight + width/2).
  std::vector<double> azimuth_axis(double boresight_deg) const
  {
    std::vector<double> axis(static_cast<std::size_t>(azimuth_bins));
    const double start = boresight_deg - sector_width_deg() / 2.0;
    for (std::size_t i = 0; i < axis.size(); ++i)
      axis[i] = start + (static_cast<double>(i) + 0.5) * azimuth_resolution_deg;
    return axis;
  }

  // Wall-clock start of the reference symbol for (scan, azimuth row, slot). Scans are 1-based.
  double reference_time_s(int scan_index, int azimuth_index, int slot) const
  {
    const double frames = static_cast<double>(scan_index - 1) * azimuth_bins + azimuth_index;
    return frames * plan.frame_duration_s() + slot * plan.slot_duration_s() + plan.reference_offset_s();
  }

  void validate() const
  {
    link.validate();
    require(sample_rate_hz > 0.0, "sample rate must be positive");
    require(bandwidth_hz > 0.0 && bandwidth_hz <= sample_rate_hz * (1.0 + 1e-12), "bandwidth must fit inside the sample rate");
    require(azimuth_bins >= 1, "need at least one azimuth bin");
    require(azimuth_resolution_deg > 0.0, "azimuth resolution must be positive");
    require(threads >= 1, "thread count must be >= 1");
    require(symbol_samples() >= 1, "sample rate too low");
  }
};

/// Produces range profiles and instantaneous clutter heat maps for one scene. Holds the pieces
/// that are shared by every slot (subcarrier synthesiser, LFM reference correlator).
class SectorScanner
{
public:
  SectorScanner(Scene scene, SensingSetup setup) : scene_(std::move(scene)), setup_(std::move(setup))
  {
    scene_.validate();
    setup_.validate();
    n_sym_ = setup_.symbol_samples();
    n_rx_full_ = n_sym_ * static_cast<std::size_t>(setup_.plan.sensing_symbols + 1);
    n_sc_ = subcarrier_count(setup_.bandwidth_hz, setup_.numerology());
    noise_w_ = noise_power(setup_.link);
    if (setup_.plan.kind == WaveformKind::ofdm)
    {
      require(n_sc_ >= 1, "bandwidth below one subcarrier");
      const std::ptrdiff_t k0 = setup_.centered_subcarriers ? -static_cast<std::ptrdiff_t>(n_sc_ / 2) : 0;
      synth_ = std::make_shared<ToneSynthesizer>(n_sc_, n_sym_, setup_.numerology().subcarrier_spacing_hz(), setup_.sample_rate_hz, k0);
    }
    else
    {
      lfm_.emplace(SensingWaveform::lfm(setup_.numerology(), setup_.sample_rate_hz, setup_.bandwidth_hz));
      lfm_filter_ = std::make_shared<MatchedFilter>(lfm_->segment().samples, n_rx_full_, setup_.range_bins());
      // Static echoes of a fixed chirp repeat in every slot; build them once.
      const double h_bs = scene_.base_station.height();
      for (const auto& s : scene_.static_scatterers)
        lfm_cache_.add(*lfm_, 2.0 * std::hypot(s.range_m, h_bs - s.height_m) / speed_of_light, 1.0 / std::sqrt(lfm_->nominal_power()));
    }
  }

  const Scene& scene() const { return scene_; }
  const SensingSetup& setup() const { return setup_; }
  std::size_t symbol_samples() const { return n_sym_; }
  std::size_t subcarriers() const { return n_sc_; }

  SensingWaveform waveform_for(int scan_index, int azimuth_index, int slot) const
  {
    if (lfm_)
      return *lfm_;
    auto payload = qpsk_payload(slot_seed(setup_.seed, RngStream::payload, scan_index, azimuth_index, slot), n_sc_);
    return SensingWaveform::ofdm(setup_.numerology(), setup_.sample_rate_hz, std::move(payload), setup_.centered_subcarriers, synth_);
  }

  // Unit-power reference used by the correlator.
  BasebandSegment reference(const SensingWaveform& w) const { return w.segment(1.0 / std::sqrt(w.nominal_power())); }

  // |r|^2 for one slot, lags 0..N_r-1.
  std::vector<double> slot_power(double steering_deg, const TiltState& tilt, int scan_index, int azimuth_index, int slot) const
  {
    const SensingWaveform w = waveform_for(scan_index, azimuth_index, slot);
    EchoRequest req;
    req.reference_time_s = setup_.reference_time_s(scan_index, azimuth_index, slot);
    req.noise_seed = slot_seed(setup_.seed, RngStream::noise, scan_index, azimuth_index, slot);
    req.add_noise = setup_.add_noise;
    req.noise_power_w = noise_w_;
    const auto contributions = echo_contributions(scene_, steering_deg, tilt, scan_index, req.reference_time_s, setup_.link);
    const BasebandSegment echo = synthesize_echo(contributions, w, setup_.plan, req, lfm_ ? &lfm_cache_ : nullptr);

    // The receiver is blind while the reference symbol is on air.
    std::vector<cdouble> rx(n_rx_full_);
    std::copy(echo.samples.begin(), echo.samples.end(), rx.begin() + static_cast<std::ptrdiff_t>(n_sym_));

    std::vector<cdouble> corr;
    if (lfm_filter_)
      corr = lfm_filter_->apply(rx);
    else
      corr = MatchedFilter(reference(w).samples, n_rx_full_, setup_.range_bins()).apply(rx);
    std::vector<double> p(corr.size());
    for (std::size_t i = 0; i < corr.size(); ++i)
      p[i] = std::norm(corr[i]);
    return p;
  }

  /// Slot-averaged |r|^2 for one steering direction.
  RangeProfile azimuth_range_profile(double steering_deg, const TiltState& tilt, int scan_index, int azimuth_index) const
  {
    RangeProfile rp;
    rp.bin_spacing_m = setup_.range_bin_m();
    rp.power.assign(setup_.range_bins(), 0.0);
    const int n_slots = setup_.plan.slots_per_frame;
    for (int slot = 0; slot < n_slots; ++slot)
    {
      const auto p = slot_power(steering_deg, tilt, scan_index, azimuth_index, slot);
      for (std::size_t i = 0; i < p.size(); ++i)
        rp.power[i] += p[i];
    }
    for (auto& v : rp.power)
      v /= static_cast<double>(n_slots);
    return rp;
  }

  /// One full sector sweep: one slot-averaged profile per azimuth bin.
  ClutterHeatMap scan_sector(int scan_index, const TiltState& tilt) const
  {
    ClutterHeatMap chm;
    chm.azimuth_deg = setup_.azimuth_axis(scene_.base_station.boresight_azimuth_deg);
    chm.rows = chm.azimuth_deg.size();
    chm.cols = setup_.range_bins();
    chm.power.assign(chm.rows * chm.cols, 0.0);
    chm.bin_spacing_m = setup_.range_bin_m();
    chm.scan_index = scan_index;

    auto fill_rows = [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r)
      {
        const auto rp = azimuth_range_profile(chm.azimuth_deg[r], tilt, scan_index, static_cast<int>(r));
        std::copy(rp.power.begin(), rp.power.end(), chm.row(r).begin());
      }
    };

    const auto workers = static_cast<std::size_t>(std::min<int>(setup_.threads, static_cast<int>(chm.rows)));
    if (workers <= 1)
    {
      fill_rows(0, chm.rows);
      return chm;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (chm.rows + workers - 1) / workers;
    for (std::size_t b = 0; b < chm.rows; b += chunk)
      jobs.push_back(std::async(std::launch::async, fill_rows, b, std::min(chm.rows, b + chunk)));
    for (auto& j : jobs)
      j.get();
    return chm;
  }

private:
  Scene scene_;
  SensingSetup setup_;
  std::size_t n_sym_ = 0;
  std::size_t n_rx_full_ = 0;
  std::size_t n_sc_ = 0;
  double noise_w_ = 0.0;
  std::shared_ptr<const ToneSynthesizer> synth_;
  std::optional<SensingWaveform> lfm_;
  std::shared_ptr<const MatchedFilter> lfm_filter_;
  DelayedEchoCache lfm_cache_;
};

inline RangeProfile azimuth_range_profile(const Scene& scene, double steering_deg, const TiltState& tilt, int scan_index,
                                          const SensingSetup& setup, int azimuth_index = 0)
{
  return SectorScanner(scene, setup).azimuth_range_profile(steering_deg, tilt, scan_index, azimuth_index);
}

inline ClutterHeatMap scan_sector(const Scene& scene, const SensingSetup& setup, int scan_index, const TiltState& tilt)
{
  return SectorScanner(scene, setup).scan_sector(scan_index, tilt);
}

/// y_k = alpha y_{k-1} + (1 - alpha) x_k, elementwise.
inline std::vector<double> rma_step(std::span<const double> previous, std::span<const double> input, double alpha)
{
  require(previous.size() == input.size(), "rma: shape mismatch");
  std::vector<double> out(input.size());
  for (std::size_t i = 0; i < input.size(); ++i)
    out[i] = alpha * previous[i] + (1.0 - alpha) * input[i];
  return out;
}

inline double forgetting_factor(int window_scans)
{
  require(window_scans >= 1, "RMA window must be >= 1 scan");
  return static_cast<double>(window_scans - 1) / static_cast<double>(window_scans);
}

// Smoothed clutter map state. The first update copies its input (no zero-state bias).
struct RmaState
{
  double alpha = 2.0 / 3.0;
  int updates = 0;
  std::optional<ClutterHeatMap> smoothed;

  static RmaState with_window(int window_scans) { return RmaState{forgetting_factor(window_scans), 0, std::nullopt}; }
};

inline RmaState rma_update(RmaState state, const ClutterHeatMap& x)
{
  require(state.alpha >= 0.0 && state.alpha < 1.0, "rma: forgetting factor must lie in [0, 1)");
  if (!state.smoothed)
  {
    state.smoothed = x;
  }
  else
  {
    require(state.smoothed->same_shape(x), "rma: clutter map shape mismatch");
    auto next = x;
    next.power = rma_step(state.smoothed->power, x.power, state.alpha);
    state.smoothed = std::move(next);
  }
  ++state.updates;
  return state;
}

// Mean over azimuth rows, per range bin.
inline RangeProfile azimuth_average(const ClutterHeatMap& chm)
{
  RangeProfile rp;
  rp.bin_spacing_m = chm.bin_spacing_m;
  rp.power.assign(chm.cols, 0.0);
  for (std::size_t r = 0; r < chm.rows; ++r)
  {
    const auto row = chm.row(r);
    for (std::size_t c = 0; c < chm.cols; ++c)
      rp.power[c] += row[c];
  }
  if (chm.rows > 0)
    for (auto& v : rp.power)
      v /= static_cast<double>(chm.rows);
  return rp;
}

} // namespace isac_tilt
