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

#include "isac_tilt/channel.hpp"
#include "isac_tilt/config.hpp"
#include "isac_tilt/pipeline.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace isac_tilt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

constexpr double kPi = 3.14159265358979323846;

Scene one_scatterer(double range_m, double azimuth_deg = 45.0, double height_m = 0.0, double rcs = 100.0)
{
  Scene s;
  s.static_scatterers.push_back({1, range_m, azimuth_deg, 1.0, height_m, rcs});
  return s;
}

SlotPlan plan_for(WaveformKind k) { return k == WaveformKind::ofdm ? build_slot_plan(Numerology(2), k, 6, 5, 3) : build_slot_plan(Numerology(2), k, 5, 5, 3); }

SensingWaveform waveform_for(WaveformKind k, double fs, std::uint64_t seed = 9)
{
  if (k == WaveformKind::lfm)
    return SensingWaveform::lfm(Numerology(2), fs, 50e6);
  return SensingWaveform::ofdm(Numerology(2), fs, qpsk_payload(seed, subcarrier_count(50e6, Numerology(2))));
}

EchoRequest quiet_request(double t = 0.0)
{
  EchoRequest r;
  r.reference_time_s = t;
  r.add_noise = false;
  return r;
}

// r(i) = sum_n ref[n] conj(rx[n + i]), direct summation.
std::vector<double> correlate_power(const std::vector<cdouble>& ref, const std::vector<cdouble>& rx, std::size_t lags)
{
  std::vector<double> out(lags);
  for (std::size_t i = 0; i < lags; ++i)
  {
    cdouble acc = 0.0;
    for (std::size_t n = 0; n < ref.size() && n + i < rx.size(); ++n)
      acc += ref[n] * std::conj(rx[n + i]);
    out[i] = std::norm(acc);
  }
  return out;
}

} // namespace

TEST_CASE("noise power", "[channel]")
{
  LinkBudget lb;
  CHECK_THAT(noise_power(lb), WithinRel(6.33e-13, 0.005));
  lb.noise_figure_db = 0.0;
  CHECK(noise_power(lb) == 1.380649e-23 * 290.0 * 50e6);
  const double n0 = noise_power(lb);
  lb.bandwidth_hz *= 2.0;
  CHECK_THAT(noise_power(lb), WithinRel(2.0 * n0, 1e-15));
}

TEST_CASE("path amplitude", "[channel]")
{
  const LinkBudget lb;
  const double a1 = path_amplitude(1000.0, 10.0, lb);
  const double a2 = path_amplitude(2000.0, 10.0, lb);
  CHECK_THAT(a2 * a2 / (a1 * a1), WithinRel(std::pow(2.0, -3.57), 1e-12));
  CHECK_THAT(path_amplitude(1000.0, 40.0, lb), WithinRel(2.0 * a1, 1e-12));
  // |beta|^2 = P_t sigma (c / 4 pi f_c)^2 / (4 pi) r^-3.57
  const double k = 299792458.0 / (4.0 * kPi * 3.7e9);
  CHECK_THAT(a1 * a1, WithinRel(1000.0 * 10.0 * k * k / (4.0 * kPi) * std::pow(1000.0, -3.57), 1e-12));
  double prev = path_amplitude(1.0, 1.0, lb);
  for (double r = 2.0; r < 1e5; r *= 1.7)
  {
    const double a = path_amplitude(r, 1.0, lb);
    CHECK(a < prev);
    prev = a;
  }
  CHECK_THROWS(path_amplitude(0.0, 1.0, lb));
  LinkBudget two_way = lb;
  two_way.exponent_per_leg = false;
  CHECK(two_way.round_trip_exponent() == 1.785);
}

TEST_CASE("Doppler of a receding target is negative", "[channel]")
{
  CHECK_THAT(doppler_shift_hz(12.0, 3.7e9), WithinRel(-2.0 * 12.0 * 3.7e9 / 299792458.0, 1e-15));
  CHECK(doppler_shift_hz(-5.0, 3.7e9) > 0.0);
  CHECK(doppler_shift_hz(0.0, 3.7e9) == 0.0);
}

TEST_CASE("empty scene without noise is silent", "[channel]")
{
  for (auto k : {WaveformKind::ofdm, WaveformKind::lfm})
  {
    const auto rx = synthesize_echo(Scene{}, 45.0, TiltState{}, 1, waveform_for(k, 61.44e6), plan_for(k), LinkBudget{}, quiet_request());
    CHECK(rx.size() == 5 * 1024);
    for (auto v : rx.samples)
      CHECK(v == cdouble{});
  }
}

TEST_CASE("matched filter peak sits at the round-trip delay", "[channel]")
{
  for (auto k : {WaveformKind::ofdm, WaveformKind::lfm})
  {
    for (double fs : {61.44e6, 50e6})
    {
      const auto w = waveform_for(k, fs);
      const auto plan = plan_for(k);
      for (double r : {300.0, 4594.1, 10460.2})
      {
        const auto rx = synthesize_echo(one_scatterer(r), 45.0, TiltState{}, 1, w, plan, LinkBudget{}, quiet_request());
        std::vector<cdouble> full(w.symbol_samples() + rx.size());
        std::copy(rx.samples.begin(), rx.samples.end(), full.begin() + static_cast<std::ptrdiff_t>(w.symbol_samples()));
        const auto ref = w.segment().samples;
        const auto p = correlate_power(ref, full, rx.size());
        const auto peak = static_cast<double>(std::max_element(p.begin(), p.end()) - p.begin());
        const double slant = std::hypot(r, 60.0);
        CHECK(std::abs(peak - 2.0 * slant / 299792458.0 * fs) <= 1.0);
      }
    }
  }
}

TEST_CASE("echo linearity and determinism", "[channel]")
{
  for (auto k : {WaveformKind::ofdm, WaveformKind::lfm})
  {
    const auto w = waveform_for(k, 50e6);
    const auto plan = plan_for(k);
    Scene both = one_scatterer(2000.0, 40.0, 10.0, 50.0);
    Scene a = both;
    Scene b = one_scatterer(3500.5, 47.0, 20.0, 80.0);
    both.static_scatterers.push_back(b.static_scatterers.front());
    both.moving_targets.push_back(reference_moving_targets().front().to_target());
    Scene c;
    c.moving_targets = both.moving_targets;
    const LinkBudget lb;
    const TiltState tilt{0.0, 2.0, 1};
    const auto req = quiet_request(0.0123);
    const auto sum = synthesize_echo(both, 45.0, tilt, 3, w, plan, lb, req);
    const auto ea = synthesize_echo(a, 45.0, tilt, 3, w, plan, lb, req);
    const auto eb = synthesize_echo(b, 45.0, tilt, 3, w, plan, lb, req);
    const auto ec = synthesize_echo(c, 45.0, tilt, 3, w, plan, lb, req);
    double peak = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i)
    {
      peak = std::max(peak, std::abs(sum.samples[i]));
      err = std::max(err, std::abs(sum.samples[i] - ea.samples[i] - eb.samples[i] - ec.samples[i]));
    }
    CHECK(err <= 1e-12 * peak);

    EchoRequest noisy = req;
    noisy.add_noise = true;
    noisy.noise_power_w = noise_power(lb);
    noisy.noise_seed = 77;
    const auto n1 = synthesize_echo(both, 45.0, tilt, 3, w, plan, lb, noisy);
    const auto n2 = synthesize_echo(both, 45.0, tilt, 3, w, plan, lb, noisy);
    CHECK(n1.samples == n2.samples);
    noisy.noise_seed = 78;
    CHECK(n1.samples != synthesize_echo(both, 45.0, tilt, 3, w, plan, lb, noisy).samples);
  }
}

TEST_CASE("moving target phase advances with the Doppler shift", "[channel]")
{
  const auto w = waveform_for(WaveformKind::lfm, 61.44e6);
  const auto plan = plan_for(WaveformKind::lfm);
  const LinkBudget lb;
  const double v = 11.0;
  const double fd = doppler_shift_hz(v, lb.carrier_hz);
  CHECK_THAT(std::abs(fd), WithinRel(2.0 * v * lb.carrier_hz / 299792458.0, 1e-12));

  EchoContribution c;
  c.moving = true;
  c.amplitude = 1e-6;
  c.delay_s = 2.0 * 3000.0 / 299792458.0;
  c.doppler_hz = fd;
  const std::vector<EchoContribution> cs{c};
  const double t1 = 0.001;
  const double t2 = t1 + plan.slot_duration_s();
  const auto e1 = synthesize_echo(cs, w, plan, quiet_request(t1));
  const auto e2 = synthesize_echo(cs, w, plan, quiet_request(t2));
  cdouble acc = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i)
    acc += e2.samples[i] * std::conj(e1.samples[i]);
  const double expected = std::remainder(2.0 * kPi * fd * (t2 - t1), 2.0 * kPi);
  CHECK_THAT(std::remainder(std::arg(acc) - expected, 2.0 * kPi), WithinAbs(0.0, 1e-6));

  // The scene path derives the Doppler from the radial velocity.
  Scene s;
  s.moving_targets.push_back(reference_moving_targets().front().to_target());
  const auto contrib = echo_contributions(s, 45.0, TiltState{}, 1, 0.0, lb);
  REQUIRE(contrib.size() == 1);
  const auto& m = s.moving_targets.front();
  CHECK_THAT(contrib[0].doppler_hz, WithinRel(doppler_shift_hz(radial_velocity(m.initial_position, m.velocity, s.base_station.position), lb.carrier_hz), 1e-12));
}

TEST_CASE("noise is calibrated to N0", "[channel]")
{
  const auto w = waveform_for(WaveformKind::lfm, 61.44e6);
  const auto plan = plan_for(WaveformKind::lfm);
  const LinkBudget lb;
  const double n0 = noise_power(lb);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed)
  {
    EchoRequest r;
    r.noise_seed = seed;
    r.noise_power_w = n0;
    const auto rx = synthesize_echo(Scene{}, 45.0, TiltState{}, 1, w, plan, lb, r);
    for (auto v : rx.samples)
      sum += std::norm(v);
    count += rx.size();
  }
  const double mean = sum / static_cast<double>(count);
  CHECK(std::abs(mean - n0) <= 3.0 * n0 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("more downtilt weakens a scatterer above the beam axis", "[channel]")
{
  const auto w = waveform_for(WaveformKind::lfm, 61.44e6);
  const auto plan = plan_for(WaveformKind::lfm);
  const Scene s = one_scatterer(3000.0, 45.0, 75.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double d = 0.0; d <= 6.0; d += 0.5)
  {
    const auto rx = synthesize_echo(s, 45.0, TiltState{0.0, d, 1}, 1, w, plan, LinkBudget{}, quiet_request());
    const double e = rx.energy();
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("scaling every distance scales echo power by s^-2n", "[channel]")
{
  const auto w = waveform_for(WaveformKind::lfm, 61.44e6);
  const auto plan = plan_for(WaveformKind::lfm);
  const LinkBudget lb;
  const double s = 1.6;
  Scene near = one_scatterer(2500.0, 44.0, 20.0);
  Scene far = one_scatterer(2500.0 * s, 44.0, 20.0 * s);
  far.base_station.position.z = 60.0 * s;
  const double en = synthesize_echo(near, 45.0, TiltState{}, 1, w, plan, lb, quiet_request()).energy();
  const double ef = synthesize_echo(far, 45.0, TiltState{}, 1, w, plan, lb, quiet_request()).energy();
  CHECK_THAT(ef / en, WithinRel(std::pow(s, -2.0 * 1.785), 1e-9));
}

TEST_CASE("echo beyond the window keeps only its in-window part", "[channel]")
{
  const auto w = waveform_for(WaveformKind::lfm, 61.44e6);
  const auto plan = plan_for(WaveformKind::lfm);
  const double r_max = max_range(Numerology(2), 5);
  const auto partial = synthesize_echo(one_scatterer(r_max * 1.1), 45.0, TiltState{}, 1, w, plan, LinkBudget{}, quiet_request());
  std::size_t nonzero = 0;
  for (auto v : partial.samples)
    nonzero += v != cdouble{} ? 1 : 0;
  CHECK(nonzero > 0);
  CHECK(nonzero < w.symbol_samples());
  const auto beyond = synthesize_echo(one_scatterer(r_max * 1.3), 45.0, TiltState{}, 1, w, plan, LinkBudget{}, quiet_request());
  CHECK(beyond.energy() == 0.0);
}
