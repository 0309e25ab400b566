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

// On-disk layout of a run directory:
//
//   chm/scan_NN.tsv                 smoothed clutter heat maps, one per scan
//   chm_instantaneous/scan_NN.tsv   per-scan maps before smoothing
//   figures/*.tsv                   plain tables behind the usual plots
//   report.json                     detection and estimation records
//   manifest.json                   written last; its presence marks a complete export
//
// Matrix files are tab-separated UTF-8. Lines starting with '#' carry metadata, then a header row
// "azimuth_deg\range_m" followed by the range axis, then one row per azimuth bin. Values are
// printed with 17 significant digits so that reading them back is exact.

#include "isac_tilt/config.hpp"
#include "isac_tilt/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace isac_tilt
{

namespace fs = std::filesystem;

inline std::string format_g17(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string scan_file_name(int scan)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "scan_%02d.tsv", scan);
  return buf;
}

// Writes to a sibling temp file and renames it into place.
inline void write_file_atomic(const fs::path& path, const std::string& content)
{
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
      throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string chm_to_tsv(const ClutterHeatMap& chm, const std::string& kind, WaveformKind waveform)
{
  std::ostringstream os;
  os << "# isac-tilt clutter heat map\n";
  os << "# kind\t" << kind << "\n";
  os << "# scan\t" << chm.scan_index << "\n";
  os << "# waveform\t" << to_string(waveform) << "\n";
  os << "# units\tlinear power\n";
  os << "# rows\t" << chm.rows << "\n";
  os << "# cols\t" << chm.cols << "\n";
  os << "# range_bin_m\t" << format_g17(chm.bin_spacing_m) << "\n";
  os << "azimuth_deg\\range_m";
  for (std::size_t c = 0; c < chm.cols; ++c)
    os << '\t' << format_g17(chm.bin_spacing_m * static_cast<double>(c));
  os << '\n';
  for (std::size_t r = 0; r < chm.rows; ++r)
  {
    os << format_g17(chm.azimuth_deg[r]);
    for (double v : chm.row(r))
      os << '\t' << format_g17(v);
    os << '\n';
  }
  return os.str();
}

/// Reads a matrix file written by chm_to_tsv.
inline ClutterHeatMap import_chm(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path.string());
  ClutterHeatMap chm;
  std::string line;
  bool header_seen = false;
  std::vector<double> range_axis;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true)
    {
      const auto tab = s.find('\t', start);
      f.push_back(s.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos)
        return f;
      start = tab + 1;
    }
  };
  auto number = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw Error(path.string() + ": malformed number '" + s + "'");
    return v;
  };
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    const auto f = split(line);
    if (line[0] == '#')
    {
      if (f.size() == 2 && f[0] == "# scan")
        chm.scan_index = static_cast<int>(number(f[1]));
      else if (f.size() == 2 && f[0] == "# range_bin_m")
        chm.bin_spacing_m = number(f[1]);
      continue;
    }
    if (!header_seen)
    {
      if (f.empty() || f[0] != "azimuth_deg\\range_m")
        throw Error(path.string() + ": missing axis header row");
      for (std::size_t i = 1; i < f.size(); ++i)
        range_axis.push_back(number(f[i]));
      chm.cols = range_axis.size();
      header_seen = true;
      continue;
    }
    if (f.size() != chm.cols + 1)
      throw Error(path.string() + ": row " + std::to_string(chm.rows + 1) + " has the wrong number of fields");
    chm.azimuth_deg.push_back(number(f[0]));
    for (std::size_t i = 1; i < f.size(); ++i)
      chm.power.push_back(number(f[i]));
    ++chm.rows;
  }
  if (!header_seen)
    throw Error(path.string() + ": no data");
  if (chm.bin_spacing_m == 0.0 && range_axis.size() > 1)
    chm.bin_spacing_m = range_axis[1];
  return chm;
}

namespace export_detail
{

inline json report_json(const EstimationReport& r)
{
  json j = {{"method", to_string(r.method)}, {"scan", r.scan_index}, {"available", r.available}};
  if (!r.available)
    j["reason"] = r.reason;
  else
    j["estimate_deg"] = r.estimate_deg;
  j["peaks"] = r.peaks;
  j["peak_ranges_m"] = r.peak_ranges_m;
  j["peak_observations_db"] = r.peak_observations;
  if (r.method == EstimationMethod::pattern_match)
    j["candidates_deg"] = r.candidates_deg;
  else if (r.available)
    j["cost_at_estimate"] = r.cost_at_estimate;
  return j;
}

inline std::string profiles_tsv(const RunArtifacts& art)
{
  std::ostringstream os;
  os << "range_m";
  for (int k = 1; k <= art.scans(); ++k)
    os << "\tscan_" << k;
  os << '\n';
  const std::size_t n = art.profiles.front().size();
  for (std::size_t i = 0; i < n; ++i)
  {
    os << format_g17(art.range_bin_m * static_cast<double>(i));
    for (const auto& p : art.profiles)
      os << '\t' << format_g17(p[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string mwr_tsv(const RunArtifacts& art)
{
  std::ostringstream os;
  os << "range_m";
  for (const auto& d : art.detections)
    os << "\tscan_" << d.scan_index;
  os << '\n';
  const std::size_t n = art.profiles.front().size();
  for (std::size_t i = 0; i < n; ++i)
  {
    os << format_g17(art.range_bin_m * static_cast<double>(i));
    for (const auto& d : art.detections)
      os << '\t' << (d.eta[i] ? format_g17(*d.eta[i]) : std::string("nan"));
    os << '\n';
  }
  return os.str();
}

inline std::string detections_tsv(const RunArtifacts& art)
{
  std::ostringstream os;
  os << "scan\tprevious_scan\tvalid_bins\tflagged_bins\tflagged_fraction\tdecision\tthreshold\tmin_fraction\tregularizer\n";
  for (const auto& d : art.detections)
    os << d.scan_index << '\t' << d.scan_index - 1 << '\t' << d.valid_bins << '\t' << d.flagged_bins << '\t' << format_g17(d.flagged_fraction)
       << '\t' << (d.decision ? 1 : 0) << '\t' << format_g17(d.threshold) << '\t' << format_g17(d.min_fraction) << '\t'
       << format_g17(d.regularizer) << '\n';
  return os.str();
}

inline std::string estimates_tsv(const RunArtifacts& art)
{
  std::ostringstream os;
  os << "scan\tmethod\tavailable\testimate_deg\tpeaks\ttrue_delta_deg\n";
  const auto& cfg = art.config.config;
  auto row = [&](const EstimationReport& r) {
    const double truth = r.scan_index >= cfg.failure_scan ? cfg.delta_theta_deg : 0.0;
    os << r.scan_index << '\t' << to_string(r.method) << '\t' << (r.available ? 1 : 0) << '\t' << format_g17(r.estimate_deg) << '\t'
       << r.peaks.size() << '\t' << format_g17(truth) << '\n';
  };
  for (const auto& r : art.pattern_match)
    row(r);
  for (const auto& r : art.transient)
    row(r);
  return os.str();
}

inline std::string cost_tsv(const RunArtifacts& art)
{
  std::ostringstream os;
  os << "scan\tdelta_deg\tcost\n";
  for (const auto& r : art.transient)
    for (const auto& c : r.cost_curve)
      os << r.scan_index << '\t' << format_g17(c.delta_deg) << '\t' << format_g17(c.cost) << '\n';
  return os.str();
}

} // namespace export_detail

/// Estimation and detection records as a JSON document.
inline json run_report(const RunArtifacts& art)
{
  json j;
  j["first_detection"] = art.first_detection ? json(*art.first_detection) : json(nullptr);
  j["fail_scan"] = art.fail_scan;
  j["fail_scan_source"] = art.fail_scan_detected ? "detection" : "configured";
  json dets = json::array();
  for (const auto& d : art.detections)
    dets.push_back({{"scan", d.scan_index},
                    {"decision", d.decision},
                    {"flagged_bins", d.flagged_bins},
                    {"valid_bins", d.valid_bins},
                    {"flagged_fraction", d.flagged_fraction},
                    {"regularizer", d.regularizer}});
  j["detections"] = dets;
  json pm = json::array();
  for (const auto& r : art.pattern_match)
    pm.push_back(export_detail::report_json(r));
  json tr = json::array();
  for (const auto& r : art.transient)
    tr.push_back(export_detail::report_json(r));
  j["pattern_match"] = pm;
  j["transient_model"] = tr;
  const auto head = headline_estimates(art);
  j["estimate"] = {{"pattern_match_deg", head.pattern_match_deg ? json(*head.pattern_match_deg) : json(nullptr)},
                   {"transient_model_deg", head.transient_deg ? json(*head.transient_deg) : json(nullptr)},
                   {"true_delta_deg", art.config.config.delta_theta_deg}};
  return j;
}

struct ExportOptions
{
  bool instantaneous = true;
  bool figures = true;
  bool report = true;
};

/// Writes a run directory. Any stale manifest is removed first, so an interrupted export never
/// looks complete.
inline void export_run(const RunArtifacts& art, const fs::path& dir, const ExportOptions& opt = {})
{
  require(!art.smoothed.empty(), "export: run has no scans");
  fs::create_directories(dir);
  fs::remove(dir / "manifest.json");

  const auto& cfg = art.config.config;
  json files = json::array();
  auto put = [&](const fs::path& rel, const std::string& content) {
    write_file_atomic(dir / rel, content);
    files.push_back(rel.generic_string());
  };

  for (const auto& y : art.smoothed)
    put(fs::path("chm") / scan_file_name(y.scan_index), chm_to_tsv(y, "smoothed", cfg.waveform));
  if (opt.instantaneous)
    for (const auto& x : art.instantaneous)
      put(fs::path("chm_instantaneous") / scan_file_name(x.scan_index), chm_to_tsv(x, "instantaneous", cfg.waveform));
  if (opt.figures)
  {
    put("figures/range_profiles.tsv", export_detail::profiles_tsv(art));
    put("figures/mwr.tsv", export_detail::mwr_tsv(art));
    put("figures/detections.tsv", export_detail::detections_tsv(art));
    put("figures/estimates.tsv", export_detail::estimates_tsv(art));
    put("figures/transient_cost.tsv", export_detail::cost_tsv(art));
  }
  if (opt.report)
    put("report.json", run_report(art).dump(2) + "\n");

  const SensingSetup setup = cfg.sensing_setup();
  json m;
  m["format"] = "isac-tilt-run";
  m["format_version"] = 1;
  m["config"] = art.config.resolved;
  m["config_hash"] = art.config.hash();
  m["config_source"] = art.config.source;
  m["seed"] = cfg.seed;
  m["waveform"] = to_string(cfg.waveform);
  m["scans"] = art.scans();
  m["scan_indices"] = [&] {
    json a = json::array();
    for (const auto& y : art.smoothed)
      a.push_back(y.scan_index);
    return a;
  }();
  m["failure_scan"] = cfg.failure_scan;
  m["delta_theta_deg"] = cfg.delta_theta_deg;
  m["axes"] = {{"range_bin_m", art.range_bin_m},
               {"range_bins", art.smoothed.front().cols},
               {"range_axis", "range_m[i] = i * range_bin_m = i * c / (2 * sample_rate_hz)"},
               {"azimuth_deg", art.azimuth_deg}};
  m["units"] = {{"chm", "linear power (slot-averaged squared matched-filter magnitude, unit-power reference)"},
                {"range", "m"},
                {"azimuth", "deg"}};
  m["timing"] = {{"slot_duration_s", setup.plan.slot_duration_s()},
                 {"frame_duration_s", setup.plan.frame_duration_s()},
                 {"scan_duration_s", setup.scan_duration_s()}};
  m["files"] = files;
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

struct ImportedRun
{
  json manifest;
  std::vector<ClutterHeatMap> smoothed;
  std::vector<ClutterHeatMap> instantaneous;
};

/// Loads a run directory written by export_run. Fails when the manifest is missing.
inline ImportedRun import_run(const fs::path& dir)
{
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath))
    throw Error(dir.string() + ": no manifest.json (incomplete or foreign export)");
  ImportedRun run;
  {
    std::ifstream in(mpath);
    run.manifest = json::parse(in);
  }
  for (const auto& s : run.manifest.at("scan_indices"))
  {
    const int k = s.get<int>();
    run.smoothed.push_back(import_chm(dir / "chm" / scan_file_name(k)));
    const auto xi = dir / "chm_instantaneous" / scan_file_name(k);
    if (fs::exists(xi))
      run.instantaneous.push_back(import_chm(xi));
  }
  return run;
}

/// Re-runs detection and estimation on an imported run, using the config echoed in its manifest.
inline RunArtifacts analyze_imported(const ImportedRun& run)
{
  RunArtifacts art;
  art.config = resolve_config(run.manifest.at("config"), "import");
  art.smoothed = run.smoothed;
  art.instantaneous = run.instantaneous;
  for (const auto& y : art.smoothed)
    art.profiles.push_back(azimuth_average(y).power);
  art.range_bin_m = art.smoothed.front().bin_spacing_m;
  art.azimuth_deg = art.smoothed.front().azimuth_deg;

  analyze_profiles(art);
  return art;
}

inline std::string sweep_tsv(const std::vector<SweepRow>& rows)
{
  std::ostringstream os;
  os << "delta_theta_deg\tmethod\twaveform\treplicate\tseed\tavailable\testimate_deg\tabs_error_deg\tpct_error\tdetected\tfail_scan\terror\n";
  for (const auto& r : rows)
    os << format_g17(r.delta_theta_deg) << '\t' << r.method << '\t' << to_string(r.waveform) << '\t' << r.replicate << '\t' << r.seed << '\t'
       << (r.available ? 1 : 0) << '\t' << format_g17(r.estimate_deg) << '\t' << format_g17(r.abs_error_deg) << '\t' << format_g17(r.pct_error)
       << '\t' << (r.detected ? 1 : 0) << '\t' << r.fail_scan << '\t' << r.error << '\n';
  return os.str();
}

struct SweepSummaryRow
{
  double delta_theta_deg = 0.0;
  std::string method;
  WaveformKind waveform = WaveformKind::ofdm;
  int runs = 0;
  int available = 0;
  double mean_abs_error_deg = std::numeric_limits<double>::quiet_NaN();
  double mean_pct_error = std::numeric_limits<double>::quiet_NaN();
};

/// Mean absolute and percent error per (waveform, method, delta) over available replicates.
inline std::vector<SweepSummaryRow> summarize_sweep(const std::vector<SweepRow>& rows)
{
  std::vector<SweepSummaryRow> out;
  auto find = [&](const SweepRow& r) -> SweepSummaryRow& {
    for (auto& s : out)
      if (s.delta_theta_deg == r.delta_theta_deg && s.method == r.method && s.waveform == r.waveform)
        return s;
    out.push_back({r.delta_theta_deg, r.method, r.waveform, 0, 0, 0.0, 0.0});
    return out.back();
  };
  for (const auto& r : rows)
  {
    auto& s = find(r);
    ++s.runs;
    if (r.available)
    {
      ++s.available;
      s.mean_abs_error_deg += r.abs_error_deg;
      s.mean_pct_error += r.pct_error;
    }
  }
  for (auto& s : out)
  {
    if (s.available > 0)
    {
      s.mean_abs_error_deg /= s.available;
      s.mean_pct_error /= s.available;
    }
    else
    {
      s.mean_abs_error_deg = std::numeric_limits<double>::quiet_NaN();
      s.mean_pct_error = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

inline std::string sweep_summary_tsv(const std::vector<SweepSummaryRow>& rows)
{
  std::ostringstream os;
  os << "delta_theta_deg\tmethod\twaveform\truns\tavailable\tmean_abs_error_deg\tmean_pct_error\n";
  for (const auto& r : rows)
    os << format_g17(r.delta_theta_deg) << '\t' << r.method << '\t' << to_string(r.waveform) << '\t' << r.runs << '\t' << r.available << '\t'
       << format_g17(r.mean_abs_error_deg) << '\t' << format_g17(r.mean_pct_error) << '\n';
  return os.str();
}

} // namespace isac_tilt
