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

// Command-line front end: solve, experiment, diagnose, bench, threshold.
//
// Exit status is 0 on success, 1 for usage errors (bad flags, bad spec
// files, invalid solver parameters) and 2 for failures while running.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/harness.hpp"
#include "kaczmarz/matrix_market.hpp"

namespace {

namespace fs = std::filesystem;
namespace h = kaczmarz::harness;
using kaczmarz::Error;
using kaczmarz::ErrorCode;

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

/// Thrown for problems the user can fix on the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemFlags {
  std::string matrix;
  std::size_t m = 1000;
  std::size_t n = 100;
  std::string dist = "gaussian";
  bool normalize = true;
  double beta = 0.0;
  double corruption_scale = 1.0;
  double perturb = 0.0;
};

struct MethodFlags {
  std::vector<std::string> methods;
  std::optional<double> q;
  std::optional<double> q0;
  std::optional<double> q1;
  std::size_t iters = 1000;
  std::string start = "origin";
};

struct OutputFlags {
  std::string out;
  std::string format = "csv";
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
  app->add_option("--matrix", f.matrix, "Matrix Market file (overrides --m/--n/--dist)")
      ->check(CLI::ExistingFile);
  app->add_option("--m", f.m, "Rows of a generated matrix")->check(CLI::PositiveNumber);
  app->add_option("--n", f.n, "Columns of a generated matrix")->check(CLI::PositiveNumber);
  app->add_option("--dist", f.dist, "Entry distribution")
      ->check(CLI::IsMember({"gaussian", "uniform"}));
  app->add_flag("--normalize,!--no-normalize", f.normalize,
                "Scale rows to unit norm before forming b (default on)");
  app->add_option("--beta", f.beta, "Fraction of corrupted equations")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--corruption-scale", f.corruption_scale,
                  "Corruptions are U(0,1] times this value");
  app->add_option("--perturb", f.perturb,
                  "Add this multiple of a Gaussian matrix to a --matrix input");
}

void add_method_flags(CLI::App* app, MethodFlags& f, bool repeatable) {
  auto* opt = app->add_option("--method", f.methods,
                              repeatable ? "Selector (repeatable)" : "Selector");
  opt->check(CLI::IsMember({"rk", "qrk", "rqrk", "dqrk", "motzkin"}));
  if (!repeatable) opt->expected(1);
  app->add_option("--q", f.q, "Quantile for qrk and rqrk");
  app->add_option("--q0", f.q0, "Lower quantile for dqrk");
  app->add_option("--q1", f.q1, "Upper quantile for dqrk (and qrk when --q is absent)");
  app->add_option("--iters", f.iters, "Iteration budget");
  app->add_option("--start", f.start, "origin, hyperplane or a row index");
}

void add_output_flags(CLI::App* app, OutputFlags& f) {
  app->add_option("--out", f.out, "Directory for artifacts (stdout when absent)");
  app->add_option("--format", f.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
}

h::ArtifactFormat format_of(const OutputFlags& f) {
  return f.format == "json" ? h::ArtifactFormat::kJson : h::ArtifactFormat::kCsv;
}

kaczmarz::ProblemSpec problem_from(const ProblemFlags& f, std::uint64_t seed) {
  kaczmarz::ProblemSpec p;
  if (!f.matrix.empty()) {
    p.source = kaczmarz::FileSource{f.matrix, f.perturb, seed};
  } else {
    const auto dist = f.dist == "uniform" ? kaczmarz::Distribution::kUniform
                                          : kaczmarz::Distribution::kGaussian;
    p.source = kaczmarz::GeneratedSource{dist, f.m, f.n, seed};
  }
  p.normalize = f.normalize;
  p.solution_seed = seed;
  if (f.beta > 0.0) {
    kaczmarz::CorruptionSpec c;
    c.beta = f.beta;
    c.scale = f.corruption_scale;
    c.seed = seed;
    p.corruption = c;
  }
  return p;
}

kaczmarz::StartPolicy start_from(const std::string& s) {
  if (s == "origin") return kaczmarz::OriginStart{};
  if (s == "hyperplane") return kaczmarz::HyperplaneStart{};
  try {
    std::size_t pos = 0;
    const auto row = std::stoull(s, &pos);
    if (pos == s.size()) return kaczmarz::HyperplaneStart{static_cast<std::size_t>(row)};
  } catch (const std::exception&) {
  }
  throw UsageError("--start must be origin, hyperplane or a row index");
}

std::vector<h::RunSpec> runs_from(const MethodFlags& f,
                                  const std::vector<std::string>& fallback) {
  const auto& methods = f.methods.empty() ? fallback : f.methods;
  std::vector<h::RunSpec> runs;
  for (const auto& method : methods) {
    h::RunSpec run;
    try {
      // Defaults follow the selector structs; qrk falls back to --q1.
      const double q = f.q ? *f.q : method == "rqrk" ? kaczmarz::Rqrk{}.q
                                  : f.q1             ? *f.q1
                                                     : kaczmarz::Qrk{}.q;
      run.config.selector = h::make_selector(method, q, f.q0.value_or(kaczmarz::Dqrk{}.q0),
                                             f.q1.value_or(kaczmarz::Dqrk{}.q1));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    run.label = kaczmarz::describe(run.config.selector);
    run.config.max_iters = f.iters;
    run.config.start = start_from(f.start);
    runs.push_back(run);
  }
  return runs;
}

/// Rejects selector parameters that cannot work for this problem size
/// before any solving starts.
void check_selectors(const h::ExperimentSpec& spec) {
  std::size_t m = 0;
  if (const auto* g = std::get_if<kaczmarz::GeneratedSource>(&spec.problem.source)) {
    m = g->m;
  } else {
    return;  // validated when the file is loaded
  }
  for (const auto& run : spec.runs) {
    try {
      kaczmarz::validate_selector(run.config.selector, m);
    } catch (const Error& e) {
      throw UsageError(run.label + ": " + e.what());
    }
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void emit(const OutputFlags& out, const std::string& file, const std::string& text) {
  if (out.out.empty()) {
    std::cout << text;
  } else {
    const fs::path path = fs::path(out.out) / file;
    h::write_file_atomically(path, text);
    std::cerr << "wrote " << path.string() << "\n";
  }
}

int report_failures(const h::ExperimentResult& result) {
  std::size_t failed = 0;
  for (const auto& t : result.trials) {
    if (!t.error.empty() || t.trace.termination == kaczmarz::Termination::kFailed) {
      ++failed;
      const std::string why = t.error.empty() ? t.trace.failure : t.error;
      std::cerr << "error: " << t.label << " trial " << t.trial << ": " << why << "\n";
    }
  }
  return failed == 0 ? 0 : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile randomized Kaczmarz solvers and diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", h::version());

  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::size_t workers = 1;
  std::size_t record_every = 1;
  std::optional<double> threshold;
  ProblemFlags problem;
  MethodFlags method;
  OutputFlags output;

  auto* solve = app.add_subcommand("solve", "Solve one system with one method");
  add_problem_flags(solve, problem);
  add_method_flags(solve, method, false);
  add_output_flags(solve, output);
  solve->add_option("--seed", seed, "Master seed");
  solve->add_option("--threshold", threshold, "Stop once |x - x*|^2 falls to this value");
  solve->add_option("--record-every", record_every, "Record every k-th iterate");

  std::string spec_path;
  auto* experiment = app.add_subcommand("experiment", "Run a JSON experiment spec");
  experiment->add_option("spec", spec_path, "Spec file")->required()->check(CLI::ExistingFile);
  experiment->add_option("--workers", workers, "Concurrent trials (overrides the spec)");
  add_output_flags(experiment, output);

  std::vector<std::string> matrices;
  std::string penalty = "table";
  double diag_q0 = 0.6;
  double diag_q1 = 0.8;
  double diag_beta = 0.05;
  auto* diagnose = app.add_subcommand("diagnose", "Leave-one-out spectral report");
  diagnose->add_option("matrices", matrices, "Matrix Market files")->check(CLI::ExistingFile);
  diagnose->add_option("--matrix", matrices, "Matrix Market file (repeatable)")
      ->check(CLI::ExistingFile);
  diagnose->add_option("--q0", diag_q0, "Lower quantile");
  diagnose->add_option("--q1", diag_q1, "Upper quantile");
  diagnose->add_option("--beta", diag_beta, "Corruption fraction");
  diagnose->add_option("--penalty", penalty, "Corruption penalty multiplier")
      ->check(CLI::IsMember({"table", "theorem"}));
  add_output_flags(diagnose, output);

  std::size_t repeats = 5;
  auto* bench = app.add_subcommand("bench", "Per-iteration cost of each method");
  add_problem_flags(bench, problem);
  add_method_flags(bench, method, true);
  add_output_flags(bench, output);
  bench->add_option("--seed", seed, "Master seed");
  bench->add_option("--repeats", repeats, "Timed rounds per method")->check(CLI::PositiveNumber);

  auto* thresh = app.add_subcommand("threshold", "Iterations and time to a squared error");
  add_problem_flags(thresh, problem);
  add_method_flags(thresh, method, true);
  add_output_flags(thresh, output);
  thresh->add_option("--seed", seed, "Master seed");
  thresh->add_option("--trials", trials, "Independent trials")->check(CLI::PositiveNumber);
  thresh->add_option("--threshold", threshold, "Squared-error target")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*solve) {
      h::ExperimentSpec spec;
      spec.name = "solve";
      spec.seed = seed;
      spec.problem = problem_from(problem, seed);
      spec.runs = runs_from(method, {"rk"});
      spec.runs.front().config.stop.squared_error = threshold;
      spec.record_every = record_every;
      check_selectors(spec);
      const auto result = h::run_experiment(spec);
      if (format_of(output) == h::ArtifactFormat::kJson) {
        emit(output, "summary.json", h::summary_json(result));
      } else {
        emit(output, "trajectory.csv", h::trajectory_csv(result));
      }
      return report_failures(result);
    }

    if (*experiment) {
      h::ExperimentSpec spec;
      try {
        spec = h::load_experiment_spec(spec_path);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kFileError) throw;
        throw UsageError(e.what());
      }
      if (experiment->count("--workers")) spec.workers = workers;
      check_selectors(spec);
      const auto result = h::run_experiment(spec);
      if (output.out.empty()) {
        std::cout << h::summary_json(result);
      } else {
        for (const auto& p : h::emit_artifacts(result, format_of(output), output.out)) {
          std::cerr << "wrote " << p.string() << "\n";
        }
      }
      return report_failures(result);
    }

    if (*diagnose) {
      if (matrices.empty()) throw UsageError("diagnose needs at least one matrix");
      const auto form = penalty == "theorem" ? kaczmarz::PenaltyForm::kTheorem
                                             : kaczmarz::PenaltyForm::kTableReproduction;
      std::vector<fs::path> paths(matrices.begin(), matrices.end());
      const auto rows = h::diagnostic_report(paths, diag_q0, diag_q1, diag_beta, form);
      if (format_of(output) == h::ArtifactFormat::kJson) {
        emit(output, "diagnostic.json", h::diagnostic_json(rows));
      } else {
        emit(output, "diagnostic.csv", h::diagnostic_csv(rows));
      }
      for (const auto& r : rows) {
        if (!r.error.empty()) return kRuntime;
      }
      return 0;
    }

    if (*bench) {
      h::ExperimentSpec spec;
      spec.name = "bench";
      spec.seed = seed;
      spec.problem = problem_from(problem, seed);
      spec.runs = runs_from(method, {"qrk", "dqrk"});
      check_selectors(spec);
      const auto report = h::cost_parity_benchmark(spec, method.iters, repeats);
      if (format_of(output) == h::ArtifactFormat::kJson) {
        emit(output, "cost.json", h::cost_json(report));
      } else {
        emit(output, "cost.csv", h::cost_csv(report));
      }
      return 0;
    }

    if (*thresh) {
      h::ExperimentSpec spec;
      spec.name = "threshold";
      spec.seed = seed;
      spec.trials = trials;
      spec.problem = problem_from(problem, seed);
      spec.runs = runs_from(method, {"qrk", "dqrk"});
      check_selectors(spec);
      const auto results = h::time_to_threshold(spec, *threshold);
      if (format_of(output) == h::ArtifactFormat::kJson) {
        emit(output, "threshold.json", h::threshold_json(results));
      } else {
        emit(output, "threshold.csv", h::threshold_csv(results));
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
