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

// NR numerology, slot partitioning, and sample-level synthesis of the OFDM and LFM sensing
// symbols. Delayed copies of a symbol are evaluated from the continuous-time expression at the
// receiver's sample instants, so fractional delays carry no interpolation error.

#include "isac_tilt/core.hpp"
#include "isac_tilt/fft.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isac_tilt
{

enum class WaveformKind
{
  ofdm,
  lfm,
};

inline std::string to_string(WaveformKind kind) { return kind == WaveformKind::ofdm ? "ofdm" : "lfm"; }

inline WaveformKind parse_waveform_kind(std::string_view s)
{
  if (s == "ofdm" || s == "OFDM")
    return WaveformKind::ofdm;
  if (s == "lfm" || s == "LFM")
    return WaveformKind::lfm;
  throw PreconditionError("unknown waveform kind '" + std::string(s) + "' (expected ofdm or lfm)");
}

struct Numerology
{
  int mu = 2;

  explicit Numerology(int mu_ = 2) : mu(mu_) { require(mu >= 0 && mu <= 6, "numerology mu must be in 0..6"); }

  double subcarrier_spacing_hz() const { return 15e3 * static_cast<double>(1 << mu); }
  double symbol_duration_s() const { return 1.0 / subcarrier_spacing_hz(); }
};

inline constexpr int symbols_per_slot = 14;

class SlotPlanError : public PreconditionError
{
public:
  using PreconditionError::PreconditionError;
};

// Symbol partition of one slot. For LFM sensing one extra symbol carries the chirp between the
// downlink and the echo window; for OFDM the last downlink symbol doubles as the reference.
struct SlotPlan
{
  Numerology numerology{2};
  WaveformKind kind = WaveformKind::ofdm;
  int downlink_symbols = 6;
  int sensing_symbols = 5;
  int uplink_symbols = 3;
  int slots_per_frame = 40;

  int dedicated_sensing_symbols() const { return kind == WaveformKind::lfm ? 1 : 0; }
  int total_symbols() const { return downlink_symbols + dedicated_sensing_symbols() + sensing_symbols + uplink_symbols; }
  int reference_symbol_index() const { return kind == WaveformKind::ofdm ? downlink_symbols - 1 : downlink_symbols; }

  double symbol_duration_s() const { return numerology.symbol_duration_s(); }
  double slot_duration_s() const { return symbols_per_slot * symbol_duration_s(); }
  double frame_duration_s() const { return slots_per_frame * slot_duration_s(); }
  double reference_offset_s() const { return reference_symbol_index() * symbol_duration_s(); }
};

inline SlotPlan build_slot_plan(Numerology num, WaveformKind kind, int n_dl, int n_sr, int n_ul, int slots_per_frame = 40)
{
  if (n_dl < 0 || n_sr < 0 || n_ul < 0)
    throw SlotPlanError("slot plan: symbol counts must be non-negative");
  if (slots_per_frame < 1)
    throw SlotPlanError("slot plan: slots per frame must be >= 1");
  SlotPlan plan{num, kind, n_dl, n_sr, n_ul, slots_per_frame};
  if (plan.total_symbols() != symbols_per_slot)
  {
    const std::string terms = kind == WaveformKind::lfm ? " (N_D + 1 + N_SR + N_U)" : " (N_D + N_SR + N_U)";
    throw SlotPlanError("slot plan: " + to_string(kind) + " partition sums to " + std::to_string(plan.total_symbols()) + terms +
                        ", expected " + std::to_string(symbols_per_slot));
  }
  if (kind == WaveformKind::ofdm && n_dl < 1)
    throw SlotPlanError("slot plan: OFDM sensing needs at least one downlink symbol to reuse as reference");
  if (n_sr < 1)
    throw SlotPlanError("slot plan: at least one echo reception symbol is required");
  return plan;
}

struct BasebandSegment
{
  std::vector<cdouble> samples;
  double sample_rate_hz = 0.0;
  double duration_s = 0.0;

  std::size_t size() const { return samples.size(); }

  double energy() const
  {
    double e = 0.0;
    for (auto v : samples)
      e += std::norm(v);
    return e;
  }
};

inline std::size_t samples_per_symbol(Numerology num, double sample_rate_hz)
{
  require(sample_rate_hz > 0.0, "sample rate must be positive");
  return static_cast<std::size_t>(std::llround(num.symbol_duration_s() * sample_rate_hz));
}

/// Unit-modulus QPSK symbols {+-1 +-j}/sqrt(2), reproducible per seed.
inline std::vector<cdouble> qpsk_payload(std::uint64_t seed, std::size_t count)
{
  require(count >= 1, "qpsk_payload: need at least one symbol");
  std::mt19937_64 engine(seed);
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<cdouble> out(count);
  std::uint64_t bits = 0;
  int left = 0;
  for (auto& s : out)
  {
    if (left == 0)
    {
      bits = engine();
      left = 32;
    }
    s = {(bits & 1U) ? -a : a, (bits & 2U) ? -a : a};
    bits >>= 2;
    --left;
  }
  return out;
}

// Evaluates sum_k c_k exp(j 2 pi (k - k0) df (eps + m / fs)) for m = 0..N-1.
// Uses a size-M inverse FFT when fs = M * df exactly, otherwise a Bluestein chirp-z transform.
class ToneSynthesizer
{
public:
  ToneSynthesizer(std::size_t tones, std::size_t outputs, double spacing_hz, double sample_rate_hz, std::ptrdiff_t first_tone = 0)
      : tones_(tones), outputs_(outputs), spacing_hz_(spacing_hz), sample_rate_hz_(sample_rate_hz), first_tone_(first_tone)
  {
    require(tones >= 1 && outputs >= 1, "ToneSynthesizer: empty transform");
    ratio_ = spacing_hz / sample_rate_hz;
    const double m = sample_rate_hz / spacing_hz;
    const double mi = std::round(m);
    if (std::abs(m - mi) < 1e-9 * m && static_cast<std::size_t>(mi) >= tones)
    {
      grid_size_ = static_cast<std::size_t>(mi);
      return;
    }
    // Bluestein: W^{km} = w(k) w(m) conj(w(m - k)), w(n) = exp(j pi r n^2)
    conv_size_ = fft::next_pow2(tones + outputs - 1);
    chirp_.resize(std::max(tones, outputs));
    for (std::size_t n = 0; n < chirp_.size(); ++n)
      chirp_[n] = chirp_phase(static_cast<double>(n));
    filter_.assign(conv_size_, cdouble{});
    for (std::size_t n = 0; n < outputs; ++n)
      filter_[n] = std::conj(chirp_[n]);
    for (std::size_t n = 1; n < tones; ++n)
      filter_[conv_size_ - n] = std::conj(chirp_[n]);
    fft::forward(filter_);
    // Output chirp times the exp(j 2 pi k0 r m) factor contributed by the first-tone offset.
    post_.resize(outputs);
    for (std::size_t n = 0; n < outputs; ++n)
    {
      const double shift = std::fmod(static_cast<double>(first_tone_) * ratio_ * static_cast<double>(n), 1.0);
      post_[n] = chirp_[n] * unit_phasor(shift);
    }
  }

  bool exact_grid() const { return grid_size_ != 0; }
  std::size_t tones() const { return tones_; }
  std::size_t outputs() const { return outputs_; }
  std::ptrdiff_t first_tone() const { return first_tone_; }

  std::vector<cdouble> evaluate(std::span<const cdouble> coeffs, double offset_s) const
  {
    require(coeffs.size() == tones_, "ToneSynthesizer: coefficient count mismatch");
    std::vector<cdouble> out(outputs_);
    const double offset_cycles = spacing_hz_ * offset_s;
    if (exact_grid())
    {
      std::vector<cdouble> buf(grid_size_);
      const auto m = static_cast<std::ptrdiff_t>(grid_size_);
      const cdouble step = unit_phasor(offset_cycles);
      cdouble rot = unit_phasor(static_cast<double>(first_tone_) * offset_cycles);
      for (std::size_t k = 0; k < tones_; ++k, rot *= step)
      {
        const std::ptrdiff_t f = static_cast<std::ptrdiff_t>(k) + first_tone_;
        buf[static_cast<std::size_t>(((f % m) + m) % m)] += coeffs[k] * rot;
      }
      fft::inverse(buf);
      for (std::size_t i = 0; i < outputs_; ++i)
        out[i] = buf[i % grid_size_];
      return out;
    }
    std::vector<cdouble> buf(conv_size_);
    // Per-tone delay phasor by recurrence; the drift over a few thousand tones stays near 1e-13.
    const cdouble step = unit_phasor(offset_cycles);
    cdouble rot = unit_phasor(static_cast<double>(first_tone_) * offset_cycles);
    for (std::size_t k = 0; k < tones_; ++k, rot *= step)
      buf[k] = coeffs[k] * rot * chirp_[k];
    fft::forward(buf);
    for (std::size_t i = 0; i < conv_size_; ++i)
      buf[i] *= filter_[i];
    fft::inverse(buf);
    const double scale = 1.0 / static_cast<double>(conv_size_);
    for (std::size_t i = 0; i < outputs_; ++i)
      out[i] = buf[i] * post_[i] * scale;
    return out;
  }

private:
  static cdouble unit_phasor(double cycles)
  {
    const double frac = cycles - std::floor(cycles);
    return std::polar(1.0, 2.0 * pi * frac);
  }

  cdouble chirp_phase(double n) const
  {
    const double half_cycles = std::fmod(ratio_ * n * n, 2.0); // exp(j pi r n^2)
    return std::polar(1.0, pi * half_cycles);
  }

  std::size_t tones_;
  std::size_t outputs_;
  double spacing_hz_;
  double sample_rate_hz_;
  std::ptrdiff_t first_tone_;
  double ratio_ = 0.0;
  std::size_t grid_size_ = 0;
  std::size_t conv_size_ = 0;
  std::vector<cdouble> chirp_;
  std::vector<cdouble> filter_;
  std::vector<cdouble> post_;
};

// A sensing symbol s_T(t) on its support [0, N / fs), N = round(dT_s * fs).
class SensingWaveform
{
public:
  /// OFDM symbol from a payload. Subcarriers are k = 0..N_SC-1 (one-sided); with `centered` the
  /// indices are shifted by -floor(N_SC/2). A prepared synthesizer can be shared across slots.
  static SensingWaveform ofdm(Numerology num, double sample_rate_hz, std::vector<cdouble> payload, bool centered = false,
                              std::shared_ptr<const ToneSynthesizer> synth = nullptr)
  {
    require(!payload.empty(), "OFDM payload must not be empty");
    const double df = num.subcarrier_spacing_hz();
    require(static_cast<double>(payload.size()) * df <= sample_rate_hz * (1.0 + 1e-12),
            "OFDM occupied band N_SC * df exceeds the sample rate");
    SensingWaveform w(WaveformKind::ofdm, num, sample_rate_hz);
    const std::ptrdiff_t k0 = centered ? -static_cast<std::ptrdiff_t>(payload.size() / 2) : 0;
    if (!synth)
      synth = std::make_shared<ToneSynthesizer>(payload.size(), w.symbol_samples_, df, sample_rate_hz, k0);
    require(synth->tones() == payload.size() && synth->outputs() == w.symbol_samples_ && synth->first_tone() == k0,
            "ToneSynthesizer does not match the OFDM symbol");
    w.payload_ = std::move(payload);
    w.synth_ = std::move(synth);
    return w;
  }

  static SensingWaveform lfm(Numerology num, double sample_rate_hz, double bandwidth_hz)
  {
    require(bandwidth_hz > 0.0, "LFM bandwidth must be positive");
    require(bandwidth_hz <= sample_rate_hz * (1.0 + 1e-12), "LFM bandwidth exceeds the sample rate");
    SensingWaveform w(WaveformKind::lfm, num, sample_rate_hz);
    w.bandwidth_hz_ = bandwidth_hz;
    return w;
  }

  WaveformKind kind() const { return kind_; }
  std::size_t symbol_samples() const { return symbol_samples_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  double symbol_duration_s() const { return symbol_duration_s_; }
  const std::vector<cdouble>& payload() const { return payload_; }

  // Mean power of s_T over a symbol: sum |d_k|^2 for OFDM (Parseval on the subcarrier grid), 1 for LFM.
  double nominal_power() const
  {
    if (kind_ == WaveformKind::lfm)
      return 1.0;
    double p = 0.0;
    for (auto d : payload_)
      p += std::norm(d);
    return p;
  }

  // Closed-form chirp value at time t in [0, dT_s].
  double lfm_phase(double t) const { return pi * (bandwidth_hz_ / symbol_duration_s_) * t * (t - symbol_duration_s_); }

  /// Samples s_T(n / fs - delay) for the N sample instants inside the delayed support, scaled by
  /// `scale`. Returns the first absolute sample index through `first_index`.
  std::vector<cdouble> delayed(double delay_s, std::ptrdiff_t& first_index, double scale = 1.0) const
  {
    const double pos = delay_s * sample_rate_hz_;
    double start = std::ceil(pos);
    if (start - pos > 1.0 - 1e-9) // snap delays that sit on a sample instant
      start -= 1.0;
    first_index = static_cast<std::ptrdiff_t>(start);
    const double offset_s = (start - pos) / sample_rate_hz_;
    std::vector<cdouble> out;
    if (kind_ == WaveformKind::ofdm)
    {
      out = synth_->evaluate(payload_, offset_s);
      if (scale != 1.0)
        for (auto& v : out)
          v *= scale;
    }
    else
    {
      out.resize(symbol_samples_);
      for (std::size_t m = 0; m < symbol_samples_; ++m)
        out[m] = std::polar(scale, lfm_phase(offset_s + static_cast<double>(m) / sample_rate_hz_));
    }
    return out;
  }

  BasebandSegment segment(double scale = 1.0) const
  {
    std::ptrdiff_t first = 0;
    BasebandSegment seg;
    seg.samples = delayed(0.0, first, scale);
    seg.sample_rate_hz = sample_rate_hz_;
    seg.duration_s = symbol_duration_s_;
    return seg;
  }

private:
  SensingWaveform(WaveformKind kind, Numerology num, double sample_rate_hz)
      : kind_(kind), sample_rate_hz_(sample_rate_hz), symbol_duration_s_(num.symbol_duration_s()),
        symbol_samples_(samples_per_symbol(num, sample_rate_hz))
  {
    require(symbol_samples_ >= 1, "sample rate too low for one sample per symbol");
  }

  WaveformKind kind_;
  double sample_rate_hz_;
  double symbol_duration_s_;
  std::size_t symbol_samples_;
  double bandwidth_hz_ = 0.0;
  std::vector<cdouble> payload_;
  std::shared_ptr<const ToneSynthesizer> synth_;
};

/// One OFDM symbol, s_T(t) = sum_k d_k exp(j 2 pi k df t), sampled at fs over one symbol duration.
inline BasebandSegment gen_ofdm_symbol(std::span<const cdouble> payload, Numerology num, double sample_rate_hz, bool centered = false)
{
  return SensingWaveform::ofdm(num, sample_rate_hz, std::vector<cdouble>(payload.begin(), payload.end()), centered).segment();
}

/// One LFM chirp symbol, s_T(t) = exp(j pi (BW / dT_s) t (t - dT_s)), sampled at fs.
inline BasebandSegment gen_lfm_symbol(double bandwidth_hz, Numerology num, double sample_rate_hz)
{
  return SensingWaveform::lfm(num, sample_rate_hz, bandwidth_hz).segment();
}

// Number of OFDM subcarriers that fit in the signal bandwidth, floor(BW / df).
inline std::size_t subcarrier_count(double bandwidth_hz, Numerology num)
{
  return static_cast<std::size_t>(std::floor(bandwidth_hz / num.subcarrier_spacing_hz() + 1e-9));
}

} // namespace isac_tilt
