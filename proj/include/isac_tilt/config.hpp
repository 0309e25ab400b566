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

// Scenario configuration: a nested JSON document layered over built-in defaults.
//
// Loading is strict. Every key in the user document must exist in the default document (scene
// lists and a few optional fields excepted), and every value is type-checked and validated with
// the key path in the error message. Dotted-path overrides are applied to the user layer before
// validation, so "--radio.bandwidth_hz 40e6" behaves exactly like editing the file.

#include "isac_tilt/antenna.hpp"
#include "isac_tilt/channel.hpp"
#include "isac_tilt/core.hpp"
#include "isac_tilt/detection.hpp"
#include "isac_tilt/estimation.hpp"
#include "isac_tilt/pipeline.hpp"
#include "isac_tilt/scene.hpp"
#include "isac_tilt/waveform.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#ifndef ISAC_TILT_PRESET_DIR
#define ISAC_TILT_PRESET_DIR "presets"
#endif

namespace isac_tilt
{

using json = nlohmann::json;

struct SlotCounts
{
  int downlink = 6;
  int sensing = 5;
  int uplink = 3;
};

// Moving targets are specified like static ones (ground range, azimuth, height) plus a velocity.
struct MovingTargetSpec
{
  int id = 0;
  double range_m = 0.0;
  double azimuth_deg = 0.0;
  double height_m = 0.0;
  Vec3 velocity_mps;
  double rcs_m2 = 1.0;

  MovingTarget to_target() const { return MovingTarget{id, from_range_azimuth(range_m, azimuth_deg, height_m), velocity_mps, rcs_m2}; }
};

struct ScenarioConfig
{
  WaveformKind waveform = WaveformKind::ofdm;
  std::uint64_t seed = 1;

  // radio
  double carrier_hz = 3.7e9;
  int numerology = 2;
  double bandwidth_hz = 50e6;
  double sample_rate_hz = 61.44e6;
  double transmit_power_w = 1000.0;
  double noise_figure_db = 5.0;
  double system_temperature_k = 290.0;
  double path_loss_exponent = 1.785;
  bool exponent_per_leg = true;
  bool add_noise = true;
  bool centered_subcarriers = false;

  // slot
  SlotCounts ofdm_slot{6, 5, 3};
  SlotCounts lfm_slot{5, 5, 3};
  int slots_per_frame = 40;

  // antenna and site
  PatternConfig pattern;
  int elements_horizontal = 16;
  int elements_vertical = 12;
  Vec3 bs_position{0.0, 0.0, 60.0};
  double boresight_azimuth_deg = 45.0;
  double nominal_downtilt_deg = 0.0;

  // scan
  int scans = 9;
  int rma_window = 3;
  double sector_width_deg = 45.0;
  int azimuth_bins = 45;

  // failure
  double delta_theta_deg = 4.0;
  int failure_scan = 5;

  std::vector<StaticScatterer> static_scatterers;
  std::vector<MovingTargetSpec> moving_targets;

  DetectorConfig detection;

  PeakParams peaks;
  double lookup_step_deg = 0.01;
  ElevationSource pattern_match_elevation = ElevationSource::anchors;
  double trim_fraction = 0.0;
  bool scene_anchors = true;
  double anchor_tolerance_m = 25.0;
  double transient_grid_max_deg = 10.0;
  double transient_grid_step_deg = 0.1;
  GainLaw transient_gain_law = GainLaw::two_way;
  ElevationSource transient_elevation = ElevationSource::bs_height_only;
  int transient_scans_elapsed = 1;

  // runtime (not part of the config hash: never changes results)
  int threads = 1;

  const SlotCounts& slot_counts() const { return waveform == WaveformKind::ofdm ? ofdm_slot : lfm_slot; }

  SlotPlan slot_plan() const
  {
    const auto& c = slot_counts();
    return build_slot_plan(Numerology(numerology), waveform, c.downlink, c.sensing, c.uplink, slots_per_frame);
  }

  LinkBudget link_budget() const
  {
    return LinkBudget{transmit_power_w, carrier_hz, path_loss_exponent, noise_figure_db, system_temperature_k, bandwidth_hz, exponent_per_leg};
  }

  Scene scene() const
  {
    Scene s;
    s.base_station.position = bs_position;
    s.base_station.boresight_azimuth_deg = boresight_azimuth_deg;
    s.base_station.nominal_downtilt_deg = nominal_downtilt_deg;
    s.base_station.pattern = pattern;
    s.base_station.elements_horizontal = elements_horizontal;
    s.base_station.elements_vertical = elements_vertical;
    s.static_scatterers = static_scatterers;
    for (const auto& m : moving_targets)
      s.moving_targets.push_back(m.to_target());
    return s;
  }

  TiltState tilt() const { return TiltState{nominal_downtilt_deg, delta_theta_deg, failure_scan}; }

  SensingSetup sensing_setup() const
  {
    SensingSetup st;
    st.plan = slot_plan();
    st.sample_rate_hz = sample_rate_hz;
    st.bandwidth_hz = bandwidth_hz;
    st.link = link_budget();
    st.azimuth_bins = azimuth_bins;
    st.azimuth_resolution_deg = sector_width_deg / azimuth_bins;
    st.add_noise = add_noise;
    st.centered_subcarriers = centered_subcarriers;
    st.seed = seed;
    st.threads = threads;
    return st;
  }

  TiltGeometry tilt_geometry() const
  {
    TiltGeometry g;
    g.bs_height_m = bs_position.z;
    g.nominal_downtilt_deg = nominal_downtilt_deg;
    g.anchor_tolerance_m = anchor_tolerance_m;
    if (scene_anchors)
      for (const auto& s : static_scatterers)
        g.anchors.push_back({s.range_m, s.height_m});
    return g;
  }

  PatternMatchOptions pattern_match_options() const { return PatternMatchOptions{peaks, pattern_match_elevation, trim_fraction}; }

  TransientOptions transient_options() const
  {
    return TransientOptions{peaks, transient_grid_max_deg, transient_grid_step_deg, transient_gain_law, transient_elevation, transient_scans_elapsed};
  }
};

// Static scatterers of the reference scene (ground range m, azimuth deg, diameter m, height m).
inline std::vector<StaticScatterer> reference_static_scatterers()
{
  return {
      {1, 5003.4, 28.1, 32.0, 41.0, std::nullopt}, {2, 5847.8, 39.9, 28.0, 32.0, std::nullopt}, {3, 4594.1, 54.4, 15.0, 10.0, std::nullopt},
      {4, 6869.7, 58.7, 44.0, 50.0, std::nullopt}, {5, 5891.4, 64.3, 20.0, 18.0, std::nullopt}, {6, 7801.7, 31.2, 32.0, 38.0, std::nullopt},
      {7, 10460.2, 56.2, 40.0, 51.0, std::nullopt}, {8, 7101.2, 38.1, 35.0, 27.0, std::nullopt}, {9, 9443.6, 30.5, 36.0, 42.0, std::nullopt},
  };
}

inline std::vector<MovingTargetSpec> reference_moving_targets()
{
  return {
      {10, 7095.3, 47.3, 0.0, {10.32, 6.14, 0.0}, 1.0},
      {11, 10509.2, 65.7, 0.0, {-11.43, -3.68, 0.0}, 1.0},
  };
}

namespace config_detail
{

inline json vec_to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

inline json static_to_json(const StaticScatterer& s)
{
  json j = {{"id", s.id}, {"range_m", s.range_m}, {"azimuth_deg", s.azimuth_deg}, {"diameter_m", s.diameter_m}, {"height_m", s.height_m}};
  if (s.rcs_override_m2)
    j["rcs_m2"] = *s.rcs_override_m2;
  return j;
}

inline json moving_to_json(const MovingTargetSpec& m)
{
  return {{"id", m.id},         {"range_m", m.range_m}, {"azimuth_deg", m.azimuth_deg}, {"height_m", m.height_m},
          {"velocity_mps", vec_to_json(m.velocity_mps)}, {"rcs_m2", m.rcs_m2}};
}

inline std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

// Typed access with the key path in every error.
class Reader
{
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) { expect_object(); }

  template <class T>
  T get(const std::string& key) const
  {
    const std::string p = join(path_, key);
    if (!j_.contains(key))
      throw ConfigError(p, "missing key");
    return convert<T>(j_.at(key), p);
  }

  template <class T>
  std::optional<T> optional(const std::string& key) const
  {
    if (!j_.contains(key) || j_.at(key).is_null())
      return std::nullopt;
    return convert<T>(j_.at(key), join(path_, key));
  }

  Reader child(const std::string& key) const
  {
    const std::string p = join(path_, key);
    if (!j_.contains(key))
      throw ConfigError(p, "missing section");
    return Reader(j_.at(key), p);
  }

  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  // Rejects keys outside `allowed` (used for list entries, which have no default counterpart).
  void only(std::initializer_list<std::string_view> allowed) const
  {
    for (const auto& item : j_.items())
    {
      bool ok = false;
      for (auto a : allowed)
        ok = ok || item.key() == a;
      if (!ok)
        throw ConfigError(join(path_, item.key()), "unknown key");
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& p)
  {
    if constexpr (std::is_same_v<T, bool>)
    {
      if (!v.is_boolean())
        throw ConfigError(p, "expected a boolean");
      return v.get<bool>();
    }
    else if constexpr (std::is_same_v<T, std::string>)
    {
      if (!v.is_string())
        throw ConfigError(p, "expected a string");
      return v.get<std::string>();
    }
    else if constexpr (std::is_same_v<T, Vec3>)
    {
      if (!v.is_array() || v.size() != 3)
        throw ConfigError(p, "expected a 3-element array");
      return Vec3{convert<double>(v[0], p + "[0]"), convert<double>(v[1], p + "[1]"), convert<double>(v[2], p + "[2]")};
    }
    else if constexpr (std::is_integral_v<T>)
    {
      if (v.is_number_integer() || v.is_number_unsigned())
      {
        if constexpr (std::is_unsigned_v<T>)
        {
          if (v.is_number_integer() && v.get<std::int64_t>() < 0)
            throw ConfigError(p, "expected a non-negative integer");
        }
        return v.get<T>();
      }
      if (v.is_number_float())
      {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9.0e15)
          return static_cast<T>(d);
      }
      throw ConfigError(p, "expected an integer");
    }
    else
    {
      if (!v.is_number())
        throw ConfigError(p, "expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d))
        throw ConfigError(p, "expected a finite number");
      return d;
    }
  }

private:
  void expect_object() const
  {
    if (!j_.is_object())
      throw ConfigError(path_, "expected an object");
  }

  const json& j_;
  std::string path_;
};

// Copies `user` over `base`, rejecting keys the base does not know. Arrays replace wholesale.
inline void merge_strict(json& base, const json& user, const std::string& path)
{
  if (!user.is_object())
    throw ConfigError(path, "expected an object");
  for (const auto& item : user.items())
  {
    const std::string p = join(path, item.key());
    if (!base.contains(item.key()))
    {
      // Optional keys with no default value.
      if (p == "detection.regularizer")
      {
        base[item.key()] = item.value();
        continue;
      }
      throw ConfigError(p, "unknown key");
    }
    json& slot = base[item.key()];
    if (slot.is_object())
      merge_strict(slot, item.value(), p);
    else
      slot = item.value();
  }
}

// "1.5" -> number, "true" -> bool, "[1,2]" -> array; anything unparseable stays a string.
inline json parse_override_value(const std::string& text)
{
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded())
    return json(text);
  return v;
}

inline ElevationSource parse_elevation(const std::string& s, const std::string& path)
{
  if (s == "anchors")
    return ElevationSource::anchors;
  if (s == "bs_height_only")
    return ElevationSource::bs_height_only;
  throw ConfigError(path, "expected \"anchors\" or \"bs_height_only\"");
}

inline GainLaw parse_gain_law(const std::string& s, const std::string& path)
{
  if (s == "one_way")
    return GainLaw::one_way;
  if (s == "two_way")
    return GainLaw::two_way;
  throw ConfigError(path, "expected \"one_way\" or \"two_way\"");
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace config_detail

/// The full default document. Keys here define the schema.
inline json default_config_json()
{
  using namespace config_detail;
  const ScenarioConfig d;
  json j;
  j["waveform"] = to_string(d.waveform);
  j["seed"] = d.seed;
  j["radio"] = {{"carrier_hz", d.carrier_hz},
                {"numerology", d.numerology},
                {"bandwidth_hz", d.bandwidth_hz},
                {"sample_rate_hz", d.sample_rate_hz},
                {"transmit_power_w", d.transmit_power_w},
                {"noise_figure_db", d.noise_figure_db},
                {"system_temperature_k", d.system_temperature_k},
                {"path_loss_exponent", d.path_loss_exponent},
                {"exponent_per_leg", d.exponent_per_leg},
                {"add_noise", d.add_noise},
                {"centered_subcarriers", d.centered_subcarriers}};
  auto slot = [](const SlotCounts& c) { return json{{"downlink", c.downlink}, {"sensing", c.sensing}, {"uplink", c.uplink}}; };
  j["slot"] = {{"ofdm", slot(d.ofdm_slot)}, {"lfm", slot(d.lfm_slot)}, {"slots_per_frame", d.slots_per_frame}};
  j["antenna"] = {{"hpbw_elevation_deg", d.pattern.hpbw_elevation_deg},
                  {"hpbw_azimuth_deg", d.pattern.hpbw_azimuth_deg},
                  {"max_gain_db", d.pattern.max_gain_db},
                  {"side_lobe_level_db", d.pattern.side_lobe_level_db},
                  {"front_back_ratio_db", d.pattern.front_back_ratio_db},
                  {"elements_horizontal", d.elements_horizontal},
                  {"elements_vertical", d.elements_vertical}};
  j["base_station"] = {{"position_m", vec_to_json(d.bs_position)},
                       {"boresight_azimuth_deg", d.boresight_azimuth_deg},
                       {"nominal_downtilt_deg", d.nominal_downtilt_deg}};
  j["scan"] = {{"scans", d.scans}, {"rma_window", d.rma_window}, {"sector_width_deg", d.sector_width_deg}, {"azimuth_bins", d.azimuth_bins}};
  j["failure"] = {{"delta_theta_deg", d.delta_theta_deg}, {"scan", d.failure_scan}};

  json statics = json::array();
  for (const auto& s : reference_static_scatterers())
    statics.push_back(static_to_json(s));
  json moving = json::array();
  for (const auto& m : reference_moving_targets())
    moving.push_back(moving_to_json(m));
  j["scene"] = {{"static", statics}, {"moving", moving}};

  j["detection"] = {{"threshold", d.detection.threshold},
                    {"min_fraction", d.detection.min_fraction},
                    {"regularizer_floor_multiple", d.detection.regularizer_floor_multiple}};
  j["estimation"] = {
      {"peaks",
       {{"min_height_db", d.peaks.min_height_db},
        {"max_dynamic_range_db", d.peaks.max_dynamic_range_db},
        {"min_separation_bins", d.peaks.min_separation_bins},
        {"max_peaks", d.peaks.max_peaks}}},
      {"pattern_match",
       {{"lookup_step_deg", d.lookup_step_deg}, {"elevation", to_string(d.pattern_match_elevation)}, {"trim_fraction", d.trim_fraction}}},
      {"transient",
       {{"grid_max_deg", d.transient_grid_max_deg},
        {"grid_step_deg", d.transient_grid_step_deg},
        {"gain_law", to_string(d.transient_gain_law)},
        {"elevation", to_string(d.transient_elevation)},
        {"scans_elapsed", d.transient_scans_elapsed}}},
      {"scene_anchors", d.scene_anchors},
      {"anchor_tolerance_m", d.anchor_tolerance_m}};
  j["runtime"] = {{"threads", d.threads}};
  return j;
}

struct LoadedConfig
{
  ScenarioConfig config;
  json resolved;                  // defaults with every user value and override applied
  std::vector<std::string> notes; // defaults filled in that deserve a mention
  std::string source;             // file path or preset name

  /// FNV-1a of the canonical resolved document without the runtime section, as 16 hex digits.
  std::string hash() const
  {
    json h = resolved;
    h.erase("runtime");
    const auto v = config_detail::fnv1a(h.dump());
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
  }
};

/// Sets `value` at a dotted path inside `doc`, creating intermediate objects. Numeric segments
/// index into arrays.
inline void apply_override(json& doc, const std::string& dotted_path, const json& value)
{
  if (dotted_path.empty())
    throw ConfigError("", "empty override key");
  json* node = &doc;
  std::string walked;
  std::size_t start = 0;
  while (true)
  {
    const auto dot = dotted_path.find('.', start);
    const std::string seg = dotted_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (seg.empty())
      throw ConfigError(dotted_path, "malformed override key");
    walked = config_detail::join(walked, seg);
    const bool last = dot == std::string::npos;
    if (node->is_array())
    {
      char* end = nullptr;
      const unsigned long idx = std::strtoul(seg.c_str(), &end, 10);
      if (*end != '\0' || idx >= node->size())
        throw ConfigError(walked, "array index out of range");
      node = &(*node)[idx];
    }
    else
    {
      if (node->is_null())
        *node = json::object();
      if (!node->is_object())
        throw ConfigError(walked, "cannot descend into a scalar");
      node = &(*node)[seg];
    }
    if (last)
    {
      *node = value;
      return;
    }
    start = dot + 1;
  }
}

inline void apply_override(json& doc, const std::string& assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError(assignment, "override must look like key.path=value");
  apply_override(doc, assignment.substr(0, eq), config_detail::parse_override_value(assignment.substr(eq + 1)));
}

/// Parses and validates a user document (already containing any overrides).
inline LoadedConfig resolve_config(const json& user, std::string source = {})
{
  using namespace config_detail;
  LoadedConfig out;
  out.source = std::move(source);

  if (!user.is_object())
    throw ConfigError("", "top level must be an object");
  json doc = default_config_json();
  merge_strict(doc, user, "");
  out.resolved = doc;

  const bool has_downtilt = user.contains("base_station") && user["base_station"].is_object() && user["base_station"].contains("nominal_downtilt_deg");
  if (!has_downtilt)
    out.notes.push_back("base_station.nominal_downtilt_deg not set; using 0 deg");

  ScenarioConfig& c = out.config;
  const Reader root(doc, "");
  try
  {
    c.waveform = parse_waveform_kind(root.get<std::string>("waveform"));
  }
  catch (const PreconditionError& e)
  {
    throw ConfigError("waveform", e.what());
  }
  c.seed = root.get<std::uint64_t>("seed");

  const auto radio = root.child("radio");
  c.carrier_hz = radio.get<double>("carrier_hz");
  c.numerology = radio.get<int>("numerology");
  c.bandwidth_hz = radio.get<double>("bandwidth_hz");
  c.sample_rate_hz = radio.get<double>("sample_rate_hz");
  c.transmit_power_w = radio.get<double>("transmit_power_w");
  c.noise_figure_db = radio.get<double>("noise_figure_db");
  c.system_temperature_k = radio.get<double>("system_temperature_k");
  c.path_loss_exponent = radio.get<double>("path_loss_exponent");
  c.exponent_per_leg = radio.get<bool>("exponent_per_leg");
  c.add_noise = radio.get<bool>("add_noise");
  c.centered_subcarriers = radio.get<bool>("centered_subcarriers");

  const auto slot = root.child("slot");
  auto counts = [&](const char* key) {
    const auto s = slot.child(key);
    return SlotCounts{s.get<int>("downlink"), s.get<int>("sensing"), s.get<int>("uplink")};
  };
  c.ofdm_slot = counts("ofdm");
  c.lfm_slot = counts("lfm");
  c.slots_per_frame = slot.get<int>("slots_per_frame");

  const auto ant = root.child("antenna");
  c.pattern.hpbw_elevation_deg = ant.get<double>("hpbw_elevation_deg");
  c.pattern.hpbw_azimuth_deg = ant.get<double>("hpbw_azimuth_deg");
  c.pattern.max_gain_db = ant.get<double>("max_gain_db");
  c.pattern.side_lobe_level_db = ant.get<double>("side_lobe_level_db");
  c.pattern.front_back_ratio_db = ant.get<double>("front_back_ratio_db");
  c.elements_horizontal = ant.get<int>("elements_horizontal");
  c.elements_vertical = ant.get<int>("elements_vertical");

  const auto bs = root.child("base_station");
  c.bs_position = bs.get<Vec3>("position_m");
  c.boresight_azimuth_deg = bs.get<double>("boresight_azimuth_deg");
  c.nominal_downtilt_deg = bs.get<double>("nominal_downtilt_deg");

  const auto scan = root.child("scan");
  c.scans = scan.get<int>("scans");
  c.rma_window = scan.get<int>("rma_window");
  c.sector_width_deg = scan.get<double>("sector_width_deg");
  c.azimuth_bins = scan.get<int>("azimuth_bins");

  const auto fail = root.child("failure");
  c.delta_theta_deg = fail.get<double>("delta_theta_deg");
  c.failure_scan = fail.get<int>("scan");

  const auto scene = root.child("scene");
  c.static_scatterers.clear();
  const auto& statics = scene.raw("static");
  if (!statics.is_array())
    throw ConfigError("scene.static", "expected an array");
  for (std::size_t i = 0; i < statics.size(); ++i)
  {
    const std::string p = "scene.static[" + std::to_string(i) + "]";
    const Reader s(statics[i], p);
    s.only({"id", "range_m", "azimuth_deg", "diameter_m", "height_m", "rcs_m2"});
    StaticScatterer st{s.get<int>("id"), s.get<double>("range_m"), s.get<double>("azimuth_deg"), s.get<double>("diameter_m"),
                       s.get<double>("height_m"), s.optional<double>("rcs_m2")};
    try
    {
      st.validate();
    }
    catch (const PreconditionError& e)
    {
      throw ConfigError(p, e.what());
    }
    c.static_scatterers.push_back(st);
  }
  c.moving_targets.clear();
  const auto& moving = scene.raw("moving");
  if (!moving.is_array())
    throw ConfigError("scene.moving", "expected an array");
  for (std::size_t i = 0; i < moving.size(); ++i)
  {
    const std::string p = "scene.moving[" + std::to_string(i) + "]";
    const Reader m(moving[i], p);
    m.only({"id", "range_m", "azimuth_deg", "height_m", "velocity_mps", "rcs_m2"});
    MovingTargetSpec mt{m.get<int>("id"), m.get<double>("range_m"), m.get<double>("azimuth_deg"), m.optional<double>("height_m").value_or(0.0),
                        m.get<Vec3>("velocity_mps"), m.optional<double>("rcs_m2").value_or(1.0)};
    if (!(mt.range_m > 0.0))
      throw ConfigError(p + ".range_m", "must be positive");
    if (!(mt.rcs_m2 > 0.0))
      throw ConfigError(p + ".rcs_m2", "must be positive");
    c.moving_targets.push_back(mt);
  }

  const auto det = root.child("detection");
  c.detection.threshold = det.get<double>("threshold");
  c.detection.min_fraction = det.get<double>("min_fraction");
  c.detection.regularizer_floor_multiple = det.get<double>("regularizer_floor_multiple");
  c.detection.regularizer = det.optional<double>("regularizer");

  const auto est = root.child("estimation");
  const auto pk = est.child("peaks");
  c.peaks.min_height_db = pk.get<double>("min_height_db");
  c.peaks.max_dynamic_range_db = pk.get<double>("max_dynamic_range_db");
  c.peaks.min_separation_bins = pk.get<std::size_t>("min_separation_bins");
  c.peaks.max_peaks = pk.get<std::size_t>("max_peaks");
  const auto pm = est.child("pattern_match");
  c.lookup_step_deg = pm.get<double>("lookup_step_deg");
  c.pattern_match_elevation = parse_elevation(pm.get<std::string>("elevation"), pm.path("elevation"));
  c.trim_fraction = pm.get<double>("trim_fraction");
  const auto tr = est.child("transient");
  c.transient_grid_max_deg = tr.get<double>("grid_max_deg");
  c.transient_grid_step_deg = tr.get<double>("grid_step_deg");
  c.transient_gain_law = parse_gain_law(tr.get<std::string>("gain_law"), tr.path("gain_law"));
  c.transient_elevation = parse_elevation(tr.get<std::string>("elevation"), tr.path("elevation"));
  c.transient_scans_elapsed = tr.get<int>("scans_elapsed");
  c.scene_anchors = est.get<bool>("scene_anchors");
  c.anchor_tolerance_m = est.get<double>("anchor_tolerance_m");

  c.threads = root.child("runtime").get<int>("threads");

  // Cross-field checks, each reported under the most specific key.
  auto check = [](bool ok, const std::string& path, const std::string& msg) {
    if (!ok)
      throw ConfigError(path, msg);
  };
  auto wrap = [](const std::string& path, auto&& fn) {
    try
    {
      fn();
    }
    catch (const PreconditionError& e)
    {
      throw ConfigError(path, e.what());
    }
  };
  wrap("radio.numerology", [&] { (void)Numerology(c.numerology); });
  wrap("slot.ofdm", [&] {
    build_slot_plan(Numerology(c.numerology), WaveformKind::ofdm, c.ofdm_slot.downlink, c.ofdm_slot.sensing, c.ofdm_slot.uplink, c.slots_per_frame);
  });
  wrap("slot.lfm", [&] {
    build_slot_plan(Numerology(c.numerology), WaveformKind::lfm, c.lfm_slot.downlink, c.lfm_slot.sensing, c.lfm_slot.uplink, c.slots_per_frame);
  });
  wrap("radio", [&] { c.link_budget().validate(); });
  check(c.sample_rate_hz >= c.bandwidth_hz, "radio.sample_rate_hz", "must be at least the bandwidth");
  wrap("antenna", [&] { c.pattern.validate(); });
  check(c.elements_horizontal > 0 && c.elements_vertical > 0, "antenna", "element counts must be positive");
  check(c.bs_position.z > 0.0, "base_station.position_m", "height must be positive");
  check(c.boresight_azimuth_deg >= 0.0 && c.boresight_azimuth_deg < 360.0, "base_station.boresight_azimuth_deg", "must lie in [0, 360)");
  check(c.scans >= 2, "scan.scans", "need at least two scans");
  check(c.rma_window >= 1, "scan.rma_window", "must be >= 1");
  check(c.azimuth_bins >= 1, "scan.azimuth_bins", "must be >= 1");
  check(c.sector_width_deg > 0.0, "scan.sector_width_deg", "must be positive");
  check(c.delta_theta_deg >= 0.0, "failure.delta_theta_deg", "must be non-negative");
  check(c.failure_scan >= 2, "failure.scan", "must be >= 2 so that a pre-failure scan exists");
  wrap("detection", [&] { c.detection.validate(); });
  wrap("estimation.peaks", [&] { c.peaks.validate(); });
  check(c.lookup_step_deg > 0.0 && c.lookup_step_deg <= 0.01, "estimation.pattern_match.lookup_step_deg", "must lie in (0, 0.01]");
  check(c.trim_fraction >= 0.0 && c.trim_fraction < 0.5, "estimation.pattern_match.trim_fraction", "must lie in [0, 0.5)");
  wrap("estimation.transient", [&] { c.transient_options().validate(); });
  check(c.anchor_tolerance_m >= 0.0, "estimation.anchor_tolerance_m", "must be non-negative");
  check(c.threads >= 1, "runtime.threads", "must be >= 1");
  return out;
}

inline json read_json_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open config file " + path.string());
  try
  {
    return json::parse(in);
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError("", path.string() + ": " + e.what());
  }
}

/// Preset search order: $ISAC_TILT_PRESET_DIR, then the directory baked in at build time.
inline std::filesystem::path preset_path(const std::string& name)
{
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("ISAC_TILT_PRESET_DIR"))
    dirs.emplace_back(env);
  dirs.emplace_back(ISAC_TILT_PRESET_DIR);
  for (const auto& d : dirs)
  {
    const auto p = d / (name + ".json");
    if (std::filesystem::exists(p))
      return p;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

struct ConfigSource
{
  std::optional<std::string> path;
  std::optional<std::string> preset;
  std::vector<std::pair<std::string, json>> overrides; // applied in order
};

/// File or preset (a file wins over a preset; both may be absent), then overrides, then validation.
inline LoadedConfig load_config(const ConfigSource& src)
{
  json user = json::object();
  std::string source = "defaults";
  if (src.path)
  {
    user = read_json_file(*src.path);
    source = *src.path;
  }
  else if (src.preset)
  {
    user = read_json_file(preset_path(*src.preset));
    source = "preset:" + *src.preset;
  }
  if (!user.is_object())
    throw ConfigError("", "top level must be an object");
  // Array-indexed overrides need the array present in the user layer.
  for (const auto& [key, value] : src.overrides)
  {
    if (key.rfind("scene.", 0) == 0 && key.find('.', 6) != std::string::npos)
    {
      const auto list = key.substr(6, key.find('.', 6) - 6);
      if (!user.contains("scene") || !user["scene"].contains(list))
        user["scene"][list] = default_config_json()["scene"][list];
    }
    apply_override(user, key, value);
  }
  return resolve_config(user, source);
}

inline LoadedConfig load_config(const std::filesystem::path& path) { return load_config(ConfigSource{path.string(), std::nullopt, {}}); }

inline LoadedConfig load_preset(const std::string& name) { return load_config(ConfigSource{std::nullopt, name, {}}); }

} // namespace isac_tilt
