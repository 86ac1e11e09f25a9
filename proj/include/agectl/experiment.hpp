/*
 * Copyright (c) 2026 The agectl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at:
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment specs (YAML), batch simulation runs, roll-ups and reports.
// The file format is described in docs/config.md.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agectl/metrics.hpp"
#include "agectl/netsim.hpp"

namespace agectl {

enum class SweepAxis { kNone, kSources, kRate };

struct ExperimentSpec {
  std::string name = "experiment";
  int repetitions = 1;
  std::vector<std::string> protocols;  // empty: base.protocol
  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> sweep_values;
  bool poisson_rates = false;  // kRate: poisson instead of periodic generation
  std::string output;          // default output directory, may be empty
  SimConfig base;

  // Throws kConfig.
  void validate() const;
};

// Throws Error(kConfig) with the offending key on any problem, including
// unknown keys.
ExperimentSpec parse_experiment(std::string_view yaml_text);
ExperimentSpec load_experiment(const std::filesystem::path& path);
SimConfig parse_sim_config(std::string_view yaml_text);
std::string to_yaml(const SimConfig& cfg);

struct RunSpec {
  std::string run_id;
  std::string protocol;
  double sweep_value = 0;
  int repetition = 0;
  SimConfig cfg;
};

// One entry per (protocol, sweep value, repetition). Repetition r runs with
// seed base.seed + r, so every protocol and sweep value sees the same seeds.
std::vector<RunSpec> expand_runs(const ExperimentSpec& spec);

struct RunSummary {
  std::string run_id;
  std::string protocol;
  int sources = 0;
  double avg_age_ms = 0;
  double avg_delay_ms = 0;
  double throughput_bps = 0;  // mean per source
  double inter_delivery_ms = 0;
  double backlog_avg = 0;
  double fairness = 0;  // Jain over per-source ages
  double rtt_ms = 0;
  double total_throughput_bps = 0;
};

inline constexpr std::string_view kSummaryCsvHeader =
    "run_id,protocol,sources,avg_age_ms,avg_delay_ms,throughput_bps,inter_delivery_ms,"
    "backlog_avg,fairness,rtt_ms,total_throughput_bps";

std::string to_csv_row(const RunSummary& s);

// Session files, monitor logs, optional trace and manifest.yaml for one run.
void write_run(const std::filesystem::path& dir, const RunSpec& run, const SimResult& result,
               std::string_view experiment_name);

struct RunOutcome {
  RunSpec spec;
  std::optional<RunSummary> summary;
  std::string error;  // set when the run failed
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::size_t failures = 0;
};

using ProgressFn = std::function<void(const RunOutcome&, std::size_t done, std::size_t total)>;

// Runs every expanded run (up to `jobs` in parallel), one subdirectory each,
// then writes summary.csv, rollup.csv and, when something failed,
// failures.csv under `out`.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out,
                                int jobs = 1, const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Reports: pure functions of the CSVs in a run directory.

struct SourceReport {
  std::string id;
  std::string protocol;
  SummaryStats stats;
};

struct RunReport {
  std::filesystem::path dir;
  std::vector<SourceReport> sources;
  std::optional<double> fairness;  // with two or more sources
  RunSummary summary;
};

inline constexpr std::string_view kReportCsvHeader =
    "source,protocol,age_semantics,avg_age_ms,avg_delay_ms,avg_rtt_ms,throughput_bps,"
    "inter_delivery_ms,inter_ack_ms,backlog_avg,delivered,sent,loss_fraction";

// Reads every source-<id>.csv session (paired with monitor-<id>.csv when the
// age semantics is one-way). With write_files, also writes report.csv,
// scatter_delay_age.csv, scatter_throughput_age.csv and age_trace-<id>.csv.
RunReport report_run(const std::filesystem::path& dir, double warmup_fraction = 0.1,
                     bool write_files = true);

// A run directory, or a directory whose immediate subdirectories are runs.
// Throws Error(kIo) when nothing reportable is found.
std::vector<RunReport> report_path(const std::filesystem::path& dir, double warmup_fraction = 0.1,
                                   bool write_files = true);

std::string format_report(const RunReport& report);

}  // namespace agectl
