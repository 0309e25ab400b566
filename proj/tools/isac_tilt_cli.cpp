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

// isac-tilt command-line driver.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

#include "isac_tilt.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{

using namespace isac_tilt;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct CommonOptions
{
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta_theta;
  std::optional<std::string> waveform;
  std::optional<int> threads;
  std::vector<std::string> set;
  std::string out;
  std::optional<std::string> in;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_input)
{
  sub->add_option("--config", o.config, "Scenario JSON file")->check(CLI::ExistingFile);
  sub->add_option("--preset", o.preset, "Bundled preset name (table1_ofdm, table1_lfm, desk_ofdm, desk_lfm)");
  sub->add_option("--seed", o.seed, "Master RNG seed");
  sub->add_option("--delta-theta", o.delta_theta, "Injected tilt offset in degrees");
  sub->add_option("--waveform", o.waveform, "Sensing waveform")->check(CLI::IsMember({"ofdm", "lfm"}));
  sub->add_option("--threads", o.threads, "Worker threads for azimuth rows (results do not depend on it)");
  sub->add_option("--set", o.set, "Override a config key: --set radio.bandwidth_hz=40e6 (repeatable)");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_flag("--quiet", o.quiet, "Suppress progress and notes");
  if (with_input)
    sub->add_option("--in", o.in, "Analyse an exported run directory instead of simulating")->check(CLI::ExistingDirectory);
  // Any other --dotted.key value pair is treated as a config override.
  sub->allow_extras();
}

// "--a.b=v", "--a.b v" and "a.b=v" forms from the unparsed remainder.
std::vector<std::pair<std::string, json>> extra_overrides(const std::vector<std::string>& rest)
{
  std::vector<std::pair<std::string, json>> out;
  for (std::size_t i = 0; i < rest.size(); ++i)
  {
    std::string a = rest[i];
    if (a.rfind("--", 0) == 0)
      a = a.substr(2);
    const auto eq = a.find('=');
    if (eq != std::string::npos)
    {
      out.emplace_back(a.substr(0, eq), config_detail::parse_override_value(a.substr(eq + 1)));
      continue;
    }
    if (a.find('.') == std::string::npos && rest[i].rfind("--", 0) != 0)
      throw ConfigError(rest[i], "unexpected argument");
    if (i + 1 >= rest.size())
      throw ConfigError(a, "override is missing a value");
    out.emplace_back(a, config_detail::parse_override_value(rest[++i]));
  }
  return out;
}

LoadedConfig load(const CommonOptions& o, const std::vector<std::string>& rest)
{
  ConfigSource src;
  src.path = o.config;
  src.preset = o.preset;
  for (const auto& s : o.set)
  {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(s, "--set expects key.path=value");
    src.overrides.emplace_back(s.substr(0, eq), config_detail::parse_override_value(s.substr(eq + 1)));
  }
  for (auto& kv : extra_overrides(rest))
    src.overrides.push_back(std::move(kv));
  // Dedicated flags win over generic overrides.
  if (o.seed)
    src.overrides.emplace_back("seed", json(*o.seed));
  if (o.delta_theta)
    src.overrides.emplace_back("failure.delta_theta_deg", json(*o.delta_theta));
  if (o.waveform)
    src.overrides.emplace_back("waveform", json(*o.waveform));
  if (o.threads)
    src.overrides.emplace_back("runtime.threads", json(*o.threads));
  auto lc = load_config(src);
  if (!o.quiet)
    for (const auto& n : lc.notes)
      std::cerr << "note: " << n << "\n";
  return lc;
}

ProgressFn progress_printer(bool quiet)
{
  if (quiet)
    return {};
  return [](int k, int n) { std::cerr << "scan " << k << "/" << n << " done\n"; };
}

void print_detections(const RunArtifacts& art)
{
  std::printf("scan  flagged/valid  fraction  decision\n");
  for (const auto& d : art.detections)
    std::printf("%4d  %6zu/%-6zu  %8.4f  %s\n", d.scan_index, d.flagged_bins, d.valid_bins, d.flagged_fraction, d.decision ? "ATF" : "-");
  if (art.first_detection)
    std::printf("first detection at scan %d\n", *art.first_detection);
  else
    std::printf("no detection\n");
}

void print_estimates(const RunArtifacts& art)
{
  std::printf("scan  method           estimate_deg  peaks\n");
  auto row = [](const EstimationReport& r) {
    if (r.available)
      std::printf("%4d  %-15s  %12.4f  %5zu\n", r.scan_index, to_string(r.method).c_str(), r.estimate_deg, r.peaks.size());
    else
      std::printf("%4d  %-15s  %12s  %5zu  (%s)\n", r.scan_index, to_string(r.method).c_str(), "n/a", r.peaks.size(), r.reason.c_str());
  };
  for (const auto& r : art.pattern_match)
    row(r);
  for (const auto& r : art.transient)
    row(r);
  const auto head = headline_estimates(art);
  std::printf("fail scan %d (%s); true offset %.4f deg\n", art.fail_scan, art.fail_scan_detected ? "detected" : "configured",
              art.config.config.delta_theta_deg);
  if (head.pattern_match_deg)
    std::printf("pattern_match estimate   %.4f deg\n", *head.pattern_match_deg);
  if (head.transient_deg)
    std::printf("transient_model estimate %.4f deg\n", *head.transient_deg);
}

RunArtifacts obtain_run(const CommonOptions& o, const std::vector<std::string>& rest)
{
  if (o.in)
  {
    if (o.config || o.preset || !o.set.empty() || !rest.empty() || o.seed || o.delta_theta || o.waveform)
      throw ConfigError("--in", "cannot be combined with config options; the manifest config is used");
    return analyze_imported(import_run(*o.in));
  }
  return run_scenario(load(o, rest), progress_printer(o.quiet));
}

std::vector<double> parse_deltas(const std::string& spec)
{
  // "start:stop:step" or a comma list.
  if (spec.find(':') != std::string::npos)
  {
    double a = 0, b = 0, c = 0;
    char tail = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &a, &b, &c, &tail) != 3)
      throw ConfigError("--deltas", "expected start:stop:step");
    try
    {
      return delta_grid(a, b, c);
    }
    catch (const PreconditionError& e)
    {
      throw ConfigError("--deltas", e.what());
    }
  }
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= spec.size())
  {
    const auto comma = spec.find(',', start);
    const std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0')
      throw ConfigError("--deltas", "malformed value '" + item + "'");
    v.push_back(d);
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return v;
}

int run(int argc, char** argv)
{
  CLI::App app{"isac-tilt: clutter heat map simulation and antenna tilt failure analysis"};
  app.require_subcommand(1);

  CommonOptions sim_o, det_o, est_o, exp_o, sw_o, val_o;
  auto* sim = app.add_subcommand("simulate", "Run a scenario and write all artifacts");
  add_common(sim, sim_o, false);
  auto* det = app.add_subcommand("detect", "Run (or load) a scenario and print the detection table");
  add_common(det, det_o, true);
  auto* est = app.add_subcommand("estimate", "Run (or load) a scenario and print both tilt estimates");
  add_common(est, est_o, true);
  auto* exp = app.add_subcommand("export", "Run a scenario and write the clutter heat maps with a manifest");
  add_common(exp, exp_o, false);
  std::string format = "tsv";
  exp->add_option("--format", format, "Matrix file format")->check(CLI::IsMember({"tsv"}));
  auto* sw = app.add_subcommand("sweep", "Tilt sweep over a list of offsets, both waveforms");
  add_common(sw, sw_o, false);
  std::string deltas = "0.5:6:0.5";
  int replicates = 1;
  int jobs = 1;
  sw->add_option("--deltas", deltas, "start:stop:step or comma list, degrees");
  sw->add_option("--replicates", replicates, "Runs per (offset, waveform) with distinct seeds")->check(CLI::PositiveNumber);
  sw->add_option("--jobs", jobs, "Sweep cells run concurrently")->check(CLI::PositiveNumber);
  auto* val = app.add_subcommand("validate-config", "Load, validate and print the resolved configuration");
  add_common(val, val_o, false);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  if (*val)
  {
    const auto lc = load(val_o, val->remaining());
    std::cout << lc.resolved.dump(2) << "\n";
    std::cerr << "config hash " << lc.hash() << "\n";
    return exit_ok;
  }
  if (*sim || *exp)
  {
    const auto& o = *sim ? sim_o : exp_o;
    auto* sub = *sim ? sim : exp;
    const std::string out = o.out.empty() ? "isac_tilt_run" : o.out;
    const auto art = run_scenario(load(o, sub->remaining()), progress_printer(o.quiet));
    ExportOptions eo;
    if (*exp)
      eo.figures = eo.report = false;
    export_run(art, out, eo);
    if (*sim)
    {
      print_detections(art);
      print_estimates(art);
    }
    std::cerr << "wrote " << out << " (config hash " << art.config.hash() << ")\n";
    return exit_ok;
  }
  if (*det || *est)
  {
    const auto& o = *det ? det_o : est_o;
    auto* sub = *det ? det : est;
    const auto art = obtain_run(o, sub->remaining());
    if (*det)
      print_detections(art);
    else
      print_estimates(art);
    if (!o.out.empty())
    {
      const auto report = run_report(art);
      write_file_atomic(std::filesystem::path(o.out) / (*det ? "detections.json" : "estimates.json"), report.dump(2) + "\n");
    }
    return exit_ok;
  }
  if (*sw)
  {
    const auto lc = load(sw_o, sw->remaining());
    SweepSpec spec;
    spec.delta_theta_deg = parse_deltas(deltas);
    if (sw_o.waveform)
      spec.waveforms = {parse_waveform_kind(*sw_o.waveform)};
    spec.replicates = replicates;
    spec.parallel_cells = jobs;
    const auto rows = sweep_tilt(lc, spec);
    const auto summary = summarize_sweep(rows);
    const std::string out = sw_o.out.empty() ? "isac_tilt_sweep" : sw_o.out;
    write_file_atomic(std::filesystem::path(out) / "sweep.tsv", sweep_tsv(rows));
    write_file_atomic(std::filesystem::path(out) / "sweep_summary.tsv", sweep_summary_tsv(summary));
    std::cout << sweep_summary_tsv(summary);
    int failed = 0;
    for (const auto& r : rows)
      failed += r.error.empty() ? 0 : 1;
    if (failed)
      std::cerr << failed << " sweep rows failed; see sweep.tsv\n";
    return exit_ok;
  }
  return exit_config;
}

} // namespace

int main(int argc, char** argv)
{
  try
  {
    return run(argc, argv);
  }
  catch (const isac_tilt::ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}
