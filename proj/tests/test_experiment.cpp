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

#include "isac_tilt.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace isac_tilt;
using Catch::Matchers::WithinAbs;

namespace
{

namespace fs = std::filesystem;

LoadedConfig desk(const std::string& preset, std::vector<std::pair<std::string, json>> overrides = {})
{
  ConfigSource src;
  src.preset = preset;
  src.overrides = std::move(overrides);
  return load_config(src);
}

// A narrow, short scenario for tests that only need plumbing.
LoadedConfig tiny(const std::string& preset = "desk_lfm", std::vector<std::pair<std::string, json>> extra = {})
{
  std::vector<std::pair<std::string, json>> o{{"scan.sector_width_deg", 15.0}, {"scan.azimuth_bins", 15}, {"scan.scans", 6},
                                              {"radio.bandwidth_hz", 20e6}, {"radio.sample_rate_hz", 20e6}, {"slot.slots_per_frame", 2}};
  o.insert(o.end(), extra.begin(), extra.end());
  return desk(preset, o);
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> tree(const fs::path& dir)
{
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      m[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return m;
}

fs::path scratch(const std::string& name)
{
  const auto p = fs::temp_directory_path() / ("isac_tilt_test_" + name);
  fs::remove_all(p);
  return p;
}

} // namespace

TEST_CASE("desk run detects the failure at scan 5", "[experiment]")
{
  const auto art = run_scenario(desk("desk_lfm"));
  REQUIRE(art.scans() == 9);
  REQUIRE(art.detections.size() == 8);
  for (const auto& d : art.detections)
  {
    if (d.scan_index < 5)
      CHECK_FALSE(d.decision);
    if (d.scan_index == 5)
      CHECK(d.decision);
  }
  CHECK(art.fail_scan == 5);
  CHECK(art.fail_scan_detected);
  CHECK(art.pattern_match.size() == 7);
  CHECK(art.transient.size() == 5);
  const auto est = headline_estimates(art);
  REQUIRE(est.pattern_match_deg);
  REQUIRE(est.transient_deg);
  CHECK_THAT(*est.pattern_match_deg, WithinAbs(4.0, 0.5));
  CHECK_THAT(*est.transient_deg, WithinAbs(4.0, 1.0));
  CHECK(art.profiles.size() == 9);
  CHECK(art.smoothed.front().rows == 45);
}

TEST_CASE("no failure, no detection", "[experiment]")
{
  const auto art = run_scenario(desk("desk_lfm", {{"failure.delta_theta_deg", 0.0}}));
  for (const auto& d : art.detections)
    CHECK_FALSE(d.decision);
  CHECK_FALSE(art.fail_scan_detected);
  CHECK(art.fail_scan == 5);
}

TEST_CASE("runs are deterministic and export round-trips", "[experiment][export]")
{
  const auto cfg = tiny("desk_ofdm");
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  const auto da = scratch("run_a");
  const auto db = scratch("run_b");
  export_run(a, da);
  export_run(b, db);
  const auto ta = tree(da);
  CHECK(ta == tree(db));
  CHECK(ta.count("manifest.json") == 1);
  CHECK(ta.count("report.json") == 1);
  CHECK(ta.count("figures/transient_cost.tsv") == 1);

  const auto manifest = json::parse(ta.at("manifest.json"));
  CHECK(manifest.at("config_hash") == cfg.hash());
  CHECK(manifest.at("seed") == cfg.config.seed);
  CHECK(manifest.at("scans") == 6);
  CHECK(manifest.at("failure_scan") == 5);
  const double spacing = manifest.at("axes").at("range_bin_m").get<double>();
  CHECK(spacing == speed_of_light / (2.0 * 20e6));

  const auto imported = import_run(da);
  REQUIRE(imported.smoothed.size() == 6);
  REQUIRE(imported.instantaneous.size() == 6);
  for (std::size_t k = 0; k < 6; ++k)
  {
    CHECK(imported.smoothed[k].power == a.smoothed[k].power);
    CHECK(imported.instantaneous[k].power == a.instantaneous[k].power);
    CHECK(imported.smoothed[k].azimuth_deg == a.smoothed[k].azimuth_deg);
    CHECK(imported.smoothed[k].rows == 15);
    CHECK(imported.smoothed[k].scan_index == static_cast<int>(k) + 1);
    for (std::size_t r = 1; r < 15; ++r)
      CHECK_THAT(imported.smoothed[k].azimuth_deg[r] - imported.smoothed[k].azimuth_deg[r - 1], WithinAbs(1.0, 1e-12));
  }
  CHECK(resolve_config(imported.manifest.at("config")).hash() == cfg.hash());

  const auto again = analyze_imported(imported);
  REQUIRE(again.detections.size() == a.detections.size());
  for (std::size_t i = 0; i < a.detections.size(); ++i)
    CHECK(again.detections[i].flagged_fraction == a.detections[i].flagged_fraction);
  const auto e1 = headline_estimates(a);
  const auto e2 = headline_estimates(again);
  CHECK(e1.pattern_match_deg == e2.pattern_match_deg);
  CHECK(e1.transient_deg == e2.transient_deg);

  fs::remove_all(da);
  fs::remove_all(db);
}

TEST_CASE("the manifest config reproduces the run", "[experiment][export]")
{
  const auto cfg = tiny("desk_lfm", {{"seed", 31}});
  const auto a = run_scenario(cfg);
  const auto dir = scratch("reproduce");
  export_run(a, dir);
  const auto manifest = import_run(dir).manifest;
  const auto b = run_scenario(resolve_config(manifest.at("config")));
  for (std::size_t k = 0; k < a.smoothed.size(); ++k)
    CHECK(a.smoothed[k].power == b.smoothed[k].power);
  fs::remove_all(dir);
}

TEST_CASE("interrupted export leaves no manifest", "[export]")
{
  const auto art = run_scenario(tiny());
  const auto dir = scratch("partial");
  export_run(art, dir);
  REQUIRE(fs::exists(dir / "manifest.json"));
  // Block the chm directory with a file so the next export fails part-way.
  fs::remove_all(dir / "chm");
  std::ofstream(dir / "chm") << "blocked";
  CHECK_THROWS(export_run(art, dir));
  CHECK_FALSE(fs::exists(dir / "manifest.json"));
  CHECK_THROWS(import_run(dir));
  fs::remove_all(dir);
}

TEST_CASE("matrix file layout", "[export]")
{
  ClutterHeatMap chm;
  chm.rows = 2;
  chm.cols = 3;
  chm.power = {0.1, 1e-300, 3.0, 4.5, 1.0 / 3.0, 0.0};
  chm.azimuth_deg = {22.5, 23.5};
  chm.bin_spacing_m = 2.5;
  chm.scan_index = 4;
  const auto text = chm_to_tsv(chm, "smoothed", WaveformKind::lfm);
  CHECK(text.find("# scan\t4\n") != std::string::npos);
  CHECK(text.find("azimuth_deg\\range_m\t0\t2.5\t5\n") != std::string::npos);
  const auto dir = scratch("layout");
  write_file_atomic(dir / "m.tsv", text);
  const auto back = import_chm(dir / "m.tsv");
  CHECK(back.power == chm.power);
  CHECK(back.azimuth_deg == chm.azimuth_deg);
  CHECK(back.bin_spacing_m == 2.5);
  CHECK(back.scan_index == 4);
  fs::remove_all(dir);
}

TEST_CASE("thread count does not change results", "[experiment]")
{
  const auto one = run_scenario(tiny("desk_ofdm"));
  const auto three = run_scenario(tiny("desk_ofdm", {{"runtime.threads", 3}}));
  for (std::size_t k = 0; k < one.smoothed.size(); ++k)
    CHECK(one.smoothed[k].power == three.smoothed[k].power);
}

TEST_CASE("run errors carry the scan index", "[experiment]")
{
  ScenarioConfig cfg = tiny().config;
  cfg.moving_targets = {{99, 0.0, 0.0, 0.0, {0.0, 0.0, 0.0}, 1.0}};
  try
  {
    run_scenario(cfg);
    FAIL("expected a run error");
  }
  catch (const RunError& e)
  {
    CHECK(e.scan() == 1);
  }
}

TEST_CASE("tilt sweep", "[experiment][sweep]")
{
  const auto base = tiny();
  SweepSpec spec;
  spec.delta_theta_deg = {1.5, 3.25, 5.0};
  const auto rows = sweep_tilt(base, spec);
  CHECK(rows.size() == 3 * 2 * 2);
  for (const auto& r : rows)
  {
    CHECK(r.error.empty());
    if (r.available)
      CHECK_THAT(r.abs_error_deg, WithinAbs(std::abs(r.estimate_deg - r.delta_theta_deg), 1e-12));
  }

  // Reordering the list only reorders rows; two parallel cells give the same values.
  SweepSpec reversed = spec;
  std::reverse(reversed.delta_theta_deg.begin(), reversed.delta_theta_deg.end());
  reversed.parallel_cells = 2;
  const auto rows2 = sweep_tilt(base, reversed);
  REQUIRE(rows2.size() == rows.size());
  for (const auto& r : rows)
  {
    const auto it = std::find_if(rows2.begin(), rows2.end(), [&](const SweepRow& s) {
      return s.delta_theta_deg == r.delta_theta_deg && s.waveform == r.waveform && s.method == r.method;
    });
    REQUIRE(it != rows2.end());
    CHECK(it->seed == r.seed);
    CHECK(((std::isnan(it->estimate_deg) && std::isnan(r.estimate_deg)) || it->estimate_deg == r.estimate_deg));
  }

  // A single-point sweep is one run with the cell seed.
  SweepSpec single;
  single.delta_theta_deg = {3.25};
  single.waveforms = {WaveformKind::lfm};
  const auto one = sweep_tilt(base, single);
  REQUIRE(one.size() == 2);
  LoadedConfig cell = base;
  cell.config.delta_theta_deg = 3.25;
  cell.config.waveform = WaveformKind::lfm;
  cell.config.seed = sweep_cell_seed(base.config.seed, 3.25, WaveformKind::lfm, 0);
  const auto est = headline_estimates(run_scenario(cell));
  CHECK(one[0].estimate_deg == est.pattern_match_deg.value_or(std::nan("")));
  CHECK(one[1].estimate_deg == est.transient_deg.value_or(std::nan("")));

  const auto summary = summarize_sweep(rows);
  CHECK(summary.size() == 12);
  CHECK(sweep_summary_tsv(summary).find("mean_abs_error_deg") != std::string::npos);
  CHECK_THROWS(sweep_tilt(base, SweepSpec{}));
}

TEST_CASE("delta grid", "[sweep]")
{
  const auto g = delta_grid(0.5, 6.0, 0.5);
  REQUIRE(g.size() == 12);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 6.0);
  CHECK(delta_grid(1.0, 1.0, 0.5).size() == 1);
  CHECK_THROWS(delta_grid(2.0, 1.0, 0.5));
}
