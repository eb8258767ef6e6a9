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

#include "kaczmarz/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/matrix_market.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz::harness {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Linear-interpolation quantile of sorted data (type 7).
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void summarize(ThresholdResult& r) {
  std::vector<double> its;
  std::vector<double> secs;
  for (std::size_t t = 0; t < r.iterations.size(); ++t) {
    if (r.iterations[t]) its.push_back(static_cast<double>(*r.iterations[t]));
    if (r.seconds[t]) secs.push_back(*r.seconds[t]);
  }
  r.reached_fraction = r.iterations.empty()
                           ? 0.0
                           : static_cast<double>(its.size()) / static_cast<double>(r.iterations.size());
  if (!its.empty()) {
    std::sort(its.begin(), its.end());
    r.median_iterations = sorted_quantile(its, 0.5);
    r.iqr_iterations = sorted_quantile(its, 0.75) - sorted_quantile(its, 0.25);
  }
  if (!secs.empty()) {
    std::sort(secs.begin(), secs.end());
    r.median_seconds = sorted_quantile(secs, 0.5);
    r.iqr_seconds = sorted_quantile(secs, 0.75) - sorted_quantile(secs, 0.25);
  }
}

/// Runs `body(task)` for task in [0, count) on up to `workers` threads.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t t = 0; t < count; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < count; t = next++) body(t);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::string version() {
#ifdef KACZMARZ_VERSION
  return KACZMARZ_VERSION;
#else
  return "unknown";
#endif
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "experiment has no runs");
  if (record_every < 1) throw Error(ErrorCode::kInvalidArgument, "record_every must be positive");
  std::set<std::string> labels;
  for (const auto& run : runs) {
    if (run.label.empty()) throw Error(ErrorCode::kInvalidArgument, "run label is empty");
    if (!labels.insert(run.label).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate run label '" + run.label + "'");
    }
  }
}

ProblemSpec trial_problem(const ExperimentSpec& spec, std::size_t trial) {
  ProblemSpec p = spec.problem;
  if (!spec.vary_problem) return p;
  if (auto* g = std::get_if<GeneratedSource>(&p.source)) {
    g->seed = derive_seed(g->seed, "matrix", trial);
  } else if (auto* f = std::get_if<FileSource>(&p.source)) {
    f->perturbation_seed = derive_seed(f->perturbation_seed, "perturbation", trial);
  }
  p.solution_seed = derive_seed(p.solution_seed, "solution", trial);
  if (p.corruption) p.corruption->seed = derive_seed(p.corruption->seed, "corruption", trial);
  return p;
}

std::uint64_t trial_seed(const ExperimentSpec& spec, const std::string& label, std::size_t trial) {
  return derive_seed(spec.seed, label, trial);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result{spec, {}};
  std::vector<std::vector<TrialResult>> per_trial(spec.trials);

  parallel_for(spec.trials, spec.workers, [&](std::size_t trial) {
    auto& out = per_trial[trial];
    std::optional<DenseSystem> system;
    std::string problem_error;
    try {
      system = generate_system(trial_problem(spec, trial));
    } catch (const std::exception& e) {
      problem_error = e.what();
    }
    for (const auto& run : spec.runs) {
      TrialResult r;
      r.label = run.label;
      r.method = describe(run.config.selector);
      r.trial = trial;
      r.seed = trial_seed(spec, run.label, trial);
      if (!system) {
        r.error = problem_error;
        out.push_back(std::move(r));
        continue;
      }
      SolverConfig config = run.config;
      config.seed = r.seed;
      config.record_every = spec.record_every;
      try {
        const auto start = Clock::now();
        r.trace = solve(*system, config);
        r.wall_seconds = seconds_since(start);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      out.push_back(std::move(r));
    }
  });

  for (auto& v : per_trial) {
    for (auto& r : v) result.trials.push_back(std::move(r));
  }
  std::stable_sort(result.trials.begin(), result.trials.end(),
                   [](const TrialResult& a, const TrialResult& b) {
                     return a.label != b.label ? a.label < b.label : a.trial < b.trial;
                   });
  return result;
}

std::vector<ThresholdResult> time_to_threshold(const ExperimentSpec& spec, double threshold) {
  spec.validate();
  std::vector<ThresholdResult> results(spec.runs.size());
  for (std::size_t r = 0; r < spec.runs.size(); ++r) {
    results[r].label = spec.runs[r].label;
    results[r].threshold = threshold;
  }
  for (std::size_t trial = 0; trial < spec.trials; ++trial) {
    std::optional<DenseSystem> system;
    try {
      system = generate_system(trial_problem(spec, trial));
    } catch (const std::exception&) {
    }
    for (std::size_t r = 0; r < spec.runs.size(); ++r) {
      auto& out = results[r];
      if (!system) {
        out.iterations.emplace_back();
        out.seconds.emplace_back();
        continue;
      }
      SolverConfig config = spec.runs[r].config;
      config.seed = trial_seed(spec, spec.runs[r].label, trial);
      config.stop.squared_error = threshold;
      config.record = false;
      try {
        const auto start = Clock::now();
        const SolveTrace trace = solve(*system, config);
        const double elapsed = seconds_since(start);
        if (trace.termination == Termination::kErrorThreshold) {
          out.iterations.emplace_back(trace.iterations);
          out.seconds.emplace_back(elapsed);
        } else {
          out.iterations.emplace_back();
          out.seconds.emplace_back();
        }
      } catch (const std::exception&) {
        out.iterations.emplace_back();
        out.seconds.emplace_back();
      }
    }
  }
  for (auto& r : results) summarize(r);
  return results;
}

std::vector<ThresholdResult> threshold_from_experiment(const ExperimentResult& result,
                                                       double threshold) {
  std::vector<ThresholdResult> out;
  for (const auto& run : result.spec.runs) {
    ThresholdResult r;
    r.label = run.label;
    r.threshold = threshold;
    for (const auto& t : result.trials) {
      if (t.label != run.label) continue;
      std::optional<std::size_t> its;
      std::optional<double> secs;
      if (t.error.empty()) {
        const bool stopped_here = t.trace.termination == Termination::kErrorThreshold &&
                                  run.config.stop.squared_error &&
                                  *run.config.stop.squared_error == threshold;
        if (stopped_here) {
          its = t.trace.iterations;
          secs = t.wall_seconds;
        } else {
          for (const auto& rec : t.trace.records) {
            if (rec.squared_error && *rec.squared_error <= threshold) {
              its = rec.iteration;
              break;
            }
          }
        }
      }
      r.iterations.push_back(its);
      r.seconds.push_back(secs);
    }
    summarize(r);
    out.push_back(std::move(r));
  }
  return out;
}

CostReport cost_parity_benchmark(const ExperimentSpec& spec, std::size_t iters,
                                 std::size_t repeats) {
  spec.validate();
  if (iters < 1) throw Error(ErrorCode::kInvalidArgument, "iters must be at least 1");
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be at least 1");
  const DenseSystem system = generate_system(trial_problem(spec, 0));

  CostReport report;
  report.iterations = iters;
  std::vector<SolverConfig> configs;
  for (const auto& run : spec.runs) {
    SolverConfig c = run.config;
    c.max_iters = iters;
    c.stop = {};
    c.record = false;
    c.seed = trial_seed(spec, run.label, 0);
    configs.push_back(c);
    report.runs.push_back({run.label, describe(c.selector), {}, 0.0});
    solve(system, c);  // warmup
  }
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    for (std::size_t r = 0; r < configs.size(); ++r) {
      const auto start = Clock::now();
      const SolveTrace trace = solve(system, configs[r]);
      report.runs[r].seconds.push_back(seconds_since(start));
      if (trace.termination == Termination::kFailed) {
        throw Error(ErrorCode::kInvalidArgument, "benchmark run failed: " + trace.failure);
      }
    }
  }
  std::optional<double> qrk;
  std::optional<double> dqrk;
  for (std::size_t r = 0; r < configs.size(); ++r) {
    report.runs[r].median_seconds = median_of(report.runs[r].seconds);
    if (!qrk && std::holds_alternative<Qrk>(configs[r].selector)) qrk = report.runs[r].median_seconds;
    if (!dqrk && std::holds_alternative<Dqrk>(configs[r].selector)) dqrk = report.runs[r].median_seconds;
  }
  if (qrk && dqrk && *qrk > 0.0) report.dqrk_over_qrk = *dqrk / *qrk;
  return report;
}

DiagnosticRow diagnose_matrix(const std::string& name, const DenseMatrix& a, double q0,
                              double q1, double beta, PenaltyForm form) {
  DiagnosticRow row;
  row.name = name;
  row.rows = a.rows();
  row.cols = a.cols();
  try {
    const DenseMatrix normalized = normalize_rows(a).matrix;
    const auto range = extreme_singular_values(normalized);
    row.sigma_max = range.max;
    row.sigma_loo = sigma_alpha_min_leave_one_out(normalized);
    row.below_floor = *row.sigma_loo < 1e-8 * range.max;
    row.e_value = e_diagnostic(range.max, *row.sigma_loo, q0, q1, beta, a.rows(), form);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<DiagnosticRow> diagnostic_report(std::span<const std::filesystem::path> paths,
                                             double q0, double q1, double beta,
                                             PenaltyForm form) {
  std::vector<DiagnosticRow> rows;
  for (const auto& path : paths) {
    const std::string name = path.stem().string();
    try {
      rows.push_back(diagnose_matrix(name, load_matrix_market(path), q0, q1, beta, form));
    } catch (const std::exception& e) {
      DiagnosticRow row;
      row.name = name;
      row.error = e.what();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

SelectorKind make_selector(const std::string& method, std::optional<double> q,
                           std::optional<double> q0, std::optional<double> q1) {
  const auto need = [&](const std::optional<double>& v, const char* what) {
    if (!v) throw Error(ErrorCode::kInvalidArgument, method + " needs " + what);
    return *v;
  };
  if (method == "rk") return Rk{};
  if (method == "motzkin") return Motzkin{};
  if (method == "qrk") return Qrk{q ? *q : need(q1, "q")};
  if (method == "rqrk") return Rqrk{need(q, "q")};
  if (method == "dqrk") return Dqrk{need(q0, "q0"), need(q1, "q1")};
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + method + "'");
}

}  // namespace kaczmarz::harness
