// Copyright 2026 The kaczmarz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kaczmarz/analysis.hpp"
#include "kaczmarz/problems.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz::harness {

/// Library version string embedded in emitted artifacts.
std::string version();

struct RunSpec {
  std::string label;
  SolverConfig config;  // seed is overwritten per trial
};

enum class ArtifactKind { kTrajectoryCsv, kSummaryJson, kThresholdTable };

struct ExperimentSpec {
  std::string name = "experiment";
  ProblemSpec problem;
  std::vector<RunSpec> runs;
  std::size_t trials = 1;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  /// Draw a fresh problem instance per trial (shared by every run of that
  /// trial). When false every trial uses the seeds in `problem` verbatim.
  bool vary_problem = true;
  std::size_t workers = 1;
  std::optional<double> threshold;
  std::vector<ArtifactKind> outputs = {ArtifactKind::kTrajectoryCsv, ArtifactKind::kSummaryJson};

  /// Throws kInvalidArgument for zero trials, no runs or duplicate labels.
  void validate() const;
};

/// Per-trial problem: seeds derived from (problem seeds, trial) when
/// vary_problem is set.
ProblemSpec trial_problem(const ExperimentSpec& spec, std::size_t trial);
/// Per-trial solver seed, derive_seed(spec.seed, label, trial).
std::uint64_t trial_seed(const ExperimentSpec& spec, const std::string& label, std::size_t trial);

struct TrialResult {
  std::string label;
  std::string method;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  SolveTrace trace;
  double wall_seconds = 0.0;  // excluded from deterministic artifacts
  std::string error;          // problem or configuration failure
};

struct ExperimentResult {
  ExperimentSpec spec;
  /// Sorted by (label, trial).
  std::vector<TrialResult> trials;
};

/// Solves every (run, trial) pair, up to spec.workers at a time. Failures are
/// recorded per trial and do not stop other runs.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct ThresholdResult {
  std::string label;
  double threshold = 0.0;
  /// Per trial; empty when the threshold was not reached within max_iters.
  std::vector<std::optional<std::size_t>> iterations;
  std::vector<std::optional<double>> seconds;
  double reached_fraction = 0.0;
  /// Over trials that reached the threshold only.
  std::optional<double> median_iterations;
  std::optional<double> iqr_iterations;
  std::optional<double> median_seconds;
  std::optional<double> iqr_seconds;
};

/// Iterations and wall-clock until |x_k - x*|^2 <= threshold. Runs trials
/// one at a time so timings are not contended.
std::vector<ThresholdResult> time_to_threshold(const ExperimentSpec& spec, double threshold);

/// Threshold table from finished traces: iterations come from the first
/// record at or below the threshold; seconds only when the run itself
/// stopped on that threshold.
std::vector<ThresholdResult> threshold_from_experiment(const ExperimentResult& result,
                                                       double threshold);

struct CostResult {
  std::string label;
  std::string method;
  std::vector<double> seconds;
  double median_seconds = 0.0;
};

struct CostReport {
  std::size_t iterations = 0;
  std::vector<CostResult> runs;
  /// median(dqRK) / median(qRK) for the first run of each, when both exist.
  std::optional<double> dqrk_over_qrk;
};

/// Wall-clock of exactly `iters` iterations with recording off, on the
/// trial-0 problem. One warmup solve per run, then `repeats` rounds that
/// cycle through the runs; median reported.
CostReport cost_parity_benchmark(const ExperimentSpec& spec, std::size_t iters,
                                 std::size_t repeats = 5);

struct DiagnosticRow {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::optional<double> sigma_loo;
  std::optional<double> sigma_max;
  std::optional<double> e_value;
  /// sigma_loo is below the relative resolution of the computation
  /// (1e-8 * sigma_max) and should be read as zero.
  bool below_floor = false;
  std::string error;
};

/// Row-normalizes `a`, then leave-one-out sigma and the E diagnostic.
DiagnosticRow diagnose_matrix(const std::string& name, const DenseMatrix& a, double q0,
                              double q1, double beta,
                              PenaltyForm form = PenaltyForm::kTableReproduction);

/// One row per file; unreadable or degenerate files are reported in
/// DiagnosticRow::error rather than thrown.
std::vector<DiagnosticRow> diagnostic_report(std::span<const std::filesystem::path> paths,
                                             double q0, double q1, double beta,
                                             PenaltyForm form = PenaltyForm::kTableReproduction);

// --- Spec files -----------------------------------------------------------

/// Parses the JSON experiment schema documented in README.md.
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
std::string experiment_spec_to_json(const ExperimentSpec& spec);

/// "rk", "qrk", "rqrk", "dqrk", "motzkin" with the given parameters.
SelectorKind make_selector(const std::string& method, std::optional<double> q,
                           std::optional<double> q0, std::optional<double> q1);

// --- Artifacts ------------------------------------------------------------

enum class ArtifactFormat { kCsv, kJson };

/// Columns: label,trial,iteration,squared_error,residual_norm,chosen_row,Q0,Q1.
/// Absent values are empty cells.
std::string trajectory_csv(const ExperimentResult& result);
/// Spec echo, seeds, version and per-trial outcomes. Contains no timings,
/// so identical specs give identical bytes.
std::string summary_json(const ExperimentResult& result);
std::string threshold_csv(std::span<const ThresholdResult> results);
std::string threshold_json(std::span<const ThresholdResult> results);
std::string diagnostic_csv(std::span<const DiagnosticRow> rows);
std::string diagnostic_json(std::span<const DiagnosticRow> rows);
std::string cost_json(const CostReport& report);
std::string cost_csv(const CostReport& report);

/// Writes via a temporary file in the same directory and a rename. Throws
/// kIoError.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

/// Writes the artifacts requested by result.spec.outputs into `dir`:
/// trajectory.csv and summary.json (`format` picks csv or json for the
/// threshold table). Returns the paths written.
std::vector<std::filesystem::path> emit_artifacts(const ExperimentResult& result,
                                                  ArtifactFormat format,
                                                  const std::filesystem::path& dir);

/// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace kaczmarz::harness
