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

#include "isac_tilt/config.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace isac_tilt;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace
{

std::string config_error_path(const json& user)
{
  try
  {
    resolve_config(user);
  }
  catch (const ConfigError& e)
  {
    return e.key_path();
  }
  return "<accepted>";
}

} // namespace

TEST_CASE("bundled presets load", "[config]")
{
  const auto ofdm = load_preset("table1_ofdm");
  CHECK(ofdm.config.waveform == WaveformKind::ofdm);
  CHECK(ofdm.config.numerology == 2);
  CHECK(ofdm.config.ofdm_slot.downlink == 6);
  CHECK(ofdm.config.ofdm_slot.sensing == 5);
  CHECK(ofdm.config.ofdm_slot.uplink == 3);
  CHECK(ofdm.config.slots_per_frame == 40);
  CHECK(ofdm.config.scans == 9);
  CHECK(ofdm.config.rma_window == 3);
  CHECK(ofdm.config.failure_scan == 5);
  CHECK(ofdm.config.azimuth_bins == 45);
  CHECK(ofdm.config.static_scatterers.size() == 9);
  CHECK(ofdm.config.moving_targets.size() == 2);
  CHECK(ofdm.config.pattern.max_gain_db == 21.0);
  CHECK(ofdm.config.sample_rate_hz == 61.44e6);

  const auto lfm = load_preset("table1_lfm");
  CHECK(lfm.config.waveform == WaveformKind::lfm);
  CHECK(lfm.config.slot_plan().downlink_symbols == 5);
  CHECK(lfm.config.slot_plan().total_symbols() == 14);

  for (const char* name : {"desk_ofdm", "desk_lfm"})
  {
    const auto desk = load_preset(name);
    CHECK(desk.config.sample_rate_hz == desk.config.bandwidth_hz);
    CHECK(desk.config.slots_per_frame == 8);
  }
  CHECK_THROWS_AS(load_preset("no_such_preset"), ConfigError);
}

TEST_CASE("missing nominal downtilt defaults to zero with a note", "[config]")
{
  const auto lc = load_preset("table1_ofdm");
  CHECK(lc.config.nominal_downtilt_deg == 0.0);
  REQUIRE_FALSE(lc.notes.empty());
  CHECK_THAT(lc.notes.front(), ContainsSubstring("nominal_downtilt_deg"));

  const auto set = resolve_config(json{{"base_station", {{"nominal_downtilt_deg", 2.5}}}});
  CHECK(set.config.nominal_downtilt_deg == 2.5);
  CHECK(set.notes.empty());
}

TEST_CASE("schema violations name the key path", "[config]")
{
  CHECK(config_error_path(json{{"radio", {{"carier_hz", 3.5e9}}}}) == "radio.carier_hz");
  CHECK(config_error_path(json{{"bogus", 1}}) == "bogus");
  CHECK(config_error_path(json{{"radio", {{"numerology", "two"}}}}) == "radio.numerology");
  CHECK(config_error_path(json{{"radio", {{"numerology", 9}}}}) == "radio.numerology");
  CHECK(config_error_path(json{{"slot", {{"ofdm", {{"downlink", 7}}}}}}) == "slot.ofdm");
  CHECK(config_error_path(json{{"waveform", "chirp"}}) == "waveform");
  CHECK(config_error_path(json{{"failure", {{"delta_theta_deg", -1.0}}}}) == "failure.delta_theta_deg");
  CHECK(config_error_path(json{{"scan", {{"rma_window", 0}}}}) != "<accepted>");
  CHECK(config_error_path(json{{"detection", {{"threshold", 0.0}}}}) != "<accepted>");
  CHECK(config_error_path(json{{"scene", {{"static", json::array({{{"id", 1}, {"range_m", -5.0}}})}}}}) != "<accepted>");
  CHECK(config_error_path(json{{"estimation", {{"transient", {{"gain_law", "three_way"}}}}}}) == "estimation.transient.gain_law");
  CHECK(config_error_path(json::object()) == "<accepted>");
}

TEST_CASE("dotted overrides", "[config]")
{
  ConfigSource src;
  src.preset = "table1_ofdm";
  src.overrides = {{"radio.bandwidth_hz", 40e6}, {"scene.static.0.height_m", 12.0}, {"failure.delta_theta_deg", 1.5}};
  const auto lc = load_config(src);
  CHECK(lc.config.bandwidth_hz == 40e6);
  CHECK(lc.config.static_scatterers.at(0).height_m == 12.0);
  CHECK(lc.config.delta_theta_deg == 1.5);

  json doc = json::object();
  apply_override(doc, "a.b.c=3");
  apply_override(doc, "a.name=ofdm");
  apply_override(doc, "a.flag=true");
  CHECK(doc["a"]["b"]["c"] == 3);
  CHECK(doc["a"]["name"] == "ofdm");
  CHECK(doc["a"]["flag"] == true);
  CHECK_THROWS_AS(apply_override(doc, "a..b=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "a.b.c.d=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);

  ConfigSource bad = src;
  bad.overrides = {{"scene.static.40.height_m", 1.0}};
  CHECK_THROWS_AS(load_config(bad), ConfigError);
}

TEST_CASE("config hash", "[config]")
{
  const auto a = load_preset("table1_ofdm");
  const auto b = load_preset("table1_ofdm");
  CHECK(a.hash().size() == 16);
  CHECK(a.hash() == b.hash());

  ConfigSource threads;
  threads.preset = "table1_ofdm";
  threads.overrides = {{"runtime.threads", 4}};
  CHECK(load_config(threads).hash() == a.hash());
  CHECK(load_config(threads).config.threads == 4);

  ConfigSource seed = threads;
  seed.overrides = {{"seed", 99}};
  CHECK(load_config(seed).hash() != a.hash());

  // The resolved document reloads to the same configuration.
  const auto again = resolve_config(a.resolved);
  CHECK(again.hash() == a.hash());
}

TEST_CASE("config files", "[config]")
{
  const auto dir = std::filesystem::temp_directory_path() / "isac_tilt_test_config";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"waveform": "lfm", "seed": 7, "scan": {"scans": 6}})";
  const auto lc = load_config(good);
  CHECK(lc.config.waveform == WaveformKind::lfm);
  CHECK(lc.config.seed == 7);
  CHECK(lc.config.scans == 6);
  CHECK(lc.source == good.string());

  const auto broken = dir / "broken.json";
  std::ofstream(broken) << R"({"waveform": )";
  CHECK_THROWS_AS(load_config(broken), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("derived setup", "[config]")
{
  const auto c = load_preset("table1_ofdm").config;
  const auto setup = c.sensing_setup();
  CHECK(setup.range_bins() == 5120);
  CHECK_THAT(setup.azimuth_resolution_deg, WithinAbs(1.0, 1e-15));
  CHECK(c.tilt().active_from_scan == 5);
  CHECK(c.tilt_geometry().anchors.size() == 9);
  CHECK(c.link_budget().transmit_power_w == c.transmit_power_w);
}
