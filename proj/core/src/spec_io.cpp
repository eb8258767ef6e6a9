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

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/harness.hpp"

namespace kaczmarz::harness {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> known) {
  if (!obj.is_object()) fail(where, "expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown field '" + key + "'");
  }
}

double get_double(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::optional<double> get_opt_double(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_double(obj, key, where, 0.0);
}

std::uint64_t get_u64(const json& obj, const char* key, const std::string& where,
                      std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  fail(where, std::string("'") + key + "' must be a non-negative integer");
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

ProblemSpec parse_problem(const json& j) {
  const std::string where = "problem";
  reject_unknown(j, where,
                 {"source", "m", "n", "seed", "path", "gaussian_scale", "perturbation_seed",
                  "normalize", "solution_seed", "corruption"});
  ProblemSpec p;
  const std::string source = get_string(j, "source", where, "gaussian");
  if (source == "gaussian" || source == "uniform") {
    GeneratedSource g;
    g.distribution = source == "gaussian" ? Distribution::kGaussian : Distribution::kUniform;
    g.m = get_u64(j, "m", where, 0);
    g.n = get_u64(j, "n", where, 0);
    g.seed = get_u64(j, "seed", where, 0);
    if (g.m == 0 || g.n == 0) fail(where, "'m' and 'n' are required and positive");
    if (j.contains("path")) fail(where, "'path' is only valid with source 'file'");
    p.source = g;
  } else if (source == "file") {
    FileSource f;
    f.path = get_string(j, "path", where, "");
    if (f.path.empty()) fail(where, "'path' is required with source 'file'");
    f.gaussian_scale = get_double(j, "gaussian_scale", where, 0.0);
    f.perturbation_seed = get_u64(j, "perturbation_seed", where, 0);
    p.source = f;
  } else {
    fail(where, "unknown source '" + source + "'");
  }
  p.normalize = get_bool(j, "normalize", where, true);
  p.solution_seed = get_u64(j, "solution_seed", where, 0);
  if (j.contains("corruption") && !j.at("corruption").is_null()) {
    const auto& c = j.at("corruption");
    const std::string cw = "problem.corruption";
    reject_unknown(c, cw, {"beta", "low", "high", "scale", "seed"});
    CorruptionSpec spec;
    spec.beta = get_double(c, "beta", cw, 0.0);
    spec.magnitude_low = get_double(c, "low", cw, 0.0);
    spec.magnitude_high = get_double(c, "high", cw, 1.0);
    spec.scale = get_double(c, "scale", cw, 1.0);
    spec.seed = get_u64(c, "seed", cw, 0);
    p.corruption = spec;
  }
  return p;
}

RunSpec parse_run(const json& j, std::size_t index) {
  const std::string where = "runs[" + std::to_string(index) + "]";
  reject_unknown(j, where,
                 {"label", "method", "q", "q0", "q1", "iters", "start", "stop_error",
                  "stop_residual"});
  RunSpec run;
  const std::string method = get_string(j, "method", where, "");
  if (method.empty()) fail(where, "'method' is required");
  run.label = get_string(j, "label", where, method);
  try {
    run.config.selector = make_selector(method, get_opt_double(j, "q", where),
                                        get_opt_double(j, "q0", where),
                                        get_opt_double(j, "q1", where));
  } catch (const Error& e) {
    fail(where, e.what());
  }
  run.config.max_iters = get_u64(j, "iters", where, 1000);
  if (j.contains("start")) {
    const auto& s = j.at("start");
    if (s.is_string() && s.get<std::string>() == "origin") {
      run.config.start = OriginStart{};
    } else if (s.is_string() && s.get<std::string>() == "hyperplane") {
      run.config.start = HyperplaneStart{};
    } else if (s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      run.config.start = HyperplaneStart{s.get<std::size_t>()};
    } else {
      fail(where, "'start' must be \"origin\", \"hyperplane\" or a row index");
    }
  }
  run.config.stop.squared_error = get_opt_double(j, "stop_error", where);
  run.config.stop.residual_norm = get_opt_double(j, "stop_residual", where);
  return run;
}

const char* artifact_name(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::kTrajectoryCsv: return "trajectory_csv";
    case ArtifactKind::kSummaryJson: return "summary_json";
    case ArtifactKind::kThresholdTable: return "threshold_table";
  }
  return "";
}

json selector_json(const SelectorKind& kind) {
  json j;
  j["method"] = method_name(kind);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Qrk> || std::is_same_v<T, Rqrk>) {
          j["q"] = s.q;
        } else if constexpr (std::is_same_v<T, Dqrk>) {
          j["q0"] = s.q0;
          j["q1"] = s.q1;
        }
      },
      kind);
  return j;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  const std::string where = "spec";
  reject_unknown(j, where,
                 {"name", "seed", "trials", "record_every", "workers", "vary_problem",
                  "threshold", "problem", "runs", "outputs"});
  ExperimentSpec spec;
  spec.name = get_string(j, "name", where, spec.name);
  spec.seed = get_u64(j, "seed", where, 0);
  spec.trials = get_u64(j, "trials", where, 1);
  spec.record_every = get_u64(j, "record_every", where, 1);
  spec.workers = get_u64(j, "workers", where, 1);
  spec.vary_problem = get_bool(j, "vary_problem", where, true);
  spec.threshold = get_opt_double(j, "threshold", where);
  if (!j.contains("problem")) fail(where, "'problem' is required");
  spec.problem = parse_problem(j.at("problem"));
  if (!j.contains("runs") || !j.at("runs").is_array()) fail(where, "'runs' must be an array");
  for (std::size_t i = 0; i < j.at("runs").size(); ++i) {
    spec.runs.push_back(parse_run(j.at("runs")[i], i));
  }
  if (j.contains("outputs")) {
    const auto& outs = j.at("outputs");
    if (!outs.is_array()) fail(where, "'outputs' must be an array");
    spec.outputs.clear();
    for (const auto& o : outs) {
      const std::string name = o.is_string() ? o.get<std::string>() : "";
      if (name == "trajectory_csv") {
        spec.outputs.push_back(ArtifactKind::kTrajectoryCsv);
      } else if (name == "summary_json") {
        spec.outputs.push_back(ArtifactKind::kSummaryJson);
      } else if (name == "threshold_table") {
        spec.outputs.push_back(ArtifactKind::kThresholdTable);
      } else {
        fail(where, "unknown output '" + name + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_spec(text.str());
}

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["seed"] = spec.seed;
  j["trials"] = spec.trials;
  j["record_every"] = spec.record_every;
  j["workers"] = spec.workers;
  j["vary_problem"] = spec.vary_problem;
  if (spec.threshold) j["threshold"] = *spec.threshold;

  json p;
  if (const auto* g = std::get_if<GeneratedSource>(&spec.problem.source)) {
    p["source"] = g->distribution == Distribution::kGaussian ? "gaussian" : "uniform";
    p["m"] = g->m;
    p["n"] = g->n;
    p["seed"] = g->seed;
  } else {
    const auto& f = std::get<FileSource>(spec.problem.source);
    p["source"] = "file";
    p["path"] = f.path.string();
    p["gaussian_scale"] = f.gaussian_scale;
    p["perturbation_seed"] = f.perturbation_seed;
  }
  p["normalize"] = spec.problem.normalize;
  p["solution_seed"] = spec.problem.solution_seed;
  if (const auto& c = spec.problem.corruption) {
    p["corruption"] = {{"beta", c->beta},
                       {"low", c->magnitude_low},
                       {"high", c->magnitude_high},
                       {"scale", c->scale},
                       {"seed", c->seed}};
  }
  j["problem"] = p;

  json runs = json::array();
  for (const auto& run : spec.runs) {
    json r = selector_json(run.config.selector);
    r["label"] = run.label;
    r["iters"] = run.config.max_iters;
    if (const auto* h = std::get_if<HyperplaneStart>(&run.config.start)) {
      if (h->row) {
        r["start"] = *h->row;
      } else {
        r["start"] = "hyperplane";
      }
    } else {
      r["start"] = "origin";
    }
    if (run.config.stop.squared_error) r["stop_error"] = *run.config.stop.squared_error;
    if (run.config.stop.residual_norm) r["stop_residual"] = *run.config.stop.residual_norm;
    runs.push_back(r);
  }
  j["runs"] = runs;
  json outs = json::array();
  for (auto k : spec.outputs) outs.push_back(artifact_name(k));
  j["outputs"] = outs;
  return j.dump(2);
}

}  // namespace kaczmarz::harness
