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

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/harness.hpp"

namespace kaczmarz::harness {
namespace {

using nlohmann::json;

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
std::string cell(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

/// CSV field quoting: labels are free text.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string trajectory_csv(const ExperimentResult& result) {
  std::string out = "label,trial,iteration,squared_error,residual_norm,chosen_row,Q0,Q1\n";
  for (const auto& t : result.trials) {
    const std::string prefix = quoted(t.label) + "," + std::to_string(t.trial) + ",";
    for (const auto& r : t.trace.records) {
      out += prefix;
      out += std::to_string(r.iteration) + ",";
      out += cell(r.squared_error) + ",";
      out += cell(r.residual_norm) + ",";
      out += cell(r.row) + ",";
      out += cell(r.lower_value) + ",";
      out += cell(r.upper_value) + "\n";
    }
  }
  return out;
}

std::string summary_json(const ExperimentResult& result) {
  json j;
  j["version"] = version();
  j["spec"] = json::parse(experiment_spec_to_json(result.spec));
  json trials = json::array();
  for (const auto& t : result.trials) {
    json e;
    e["label"] = t.label;
    e["method"] = t.method;
    e["trial"] = t.trial;
    e["seed"] = t.seed;
    if (!t.error.empty()) {
      e["error"] = t.error;
    } else {
      e["iterations"] = t.trace.iterations;
      e["termination"] = to_string(t.trace.termination);
      e["final_squared_error"] = opt(t.trace.final_squared_error);
      if (!t.trace.failure.empty()) e["failure"] = t.trace.failure;
    }
    trials.push_back(e);
  }
  j["trials"] = trials;
  return j.dump(2) + "\n";
}

std::string threshold_csv(std::span<const ThresholdResult> results) {
  std::string out =
      "label,threshold,trials,reached_fraction,median_iterations,iqr_iterations,"
      "median_seconds,iqr_seconds\n";
  for (const auto& r : results) {
    out += quoted(r.label) + "," + format_double(r.threshold) + "," +
           std::to_string(r.iterations.size()) + "," + format_double(r.reached_fraction) + "," +
           cell(r.median_iterations) + "," + cell(r.iqr_iterations) + "," +
           cell(r.median_seconds) + "," + cell(r.iqr_seconds) + "\n";
  }
  return out;
}

std::string threshold_json(std::span<const ThresholdResult> results) {
  json arr = json::array();
  for (const auto& r : results) {
    json e;
    e["label"] = r.label;
    e["threshold"] = r.threshold;
    e["reached_fraction"] = r.reached_fraction;
    e["median_iterations"] = opt(r.median_iterations);
    e["iqr_iterations"] = opt(r.iqr_iterations);
    e["median_seconds"] = opt(r.median_seconds);
    e["iqr_seconds"] = opt(r.iqr_seconds);
    json its = json::array();
    json secs = json::array();
    for (std::size_t t = 0; t < r.iterations.size(); ++t) {
      its.push_back(opt(r.iterations[t]));
      secs.push_back(opt(r.seconds[t]));
    }
    e["iterations"] = its;
    e["seconds"] = secs;
    arr.push_back(e);
  }
  return arr.dump(2) + "\n";
}

std::string diagnostic_csv(std::span<const DiagnosticRow> rows) {
  std::string out = "name,rows,cols,sigma_loo,sigma_max,e_value,below_floor,error\n";
  for (const auto& r : rows) {
    out += quoted(r.name) + "," + std::to_string(r.rows) + "," + std::to_string(r.cols) + "," +
           cell(r.sigma_loo) + "," + cell(r.sigma_max) + "," + cell(r.e_value) + "," +
           (r.below_floor ? "true" : "false") + "," + quoted(r.error) + "\n";
  }
  return out;
}

std::string diagnostic_json(std::span<const DiagnosticRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json e;
    e["name"] = r.name;
    e["rows"] = r.rows;
    e["cols"] = r.cols;
    e["sigma_loo"] = opt(r.sigma_loo);
    e["sigma_max"] = opt(r.sigma_max);
    e["e_value"] = opt(r.e_value);
    e["below_floor"] = r.below_floor;
    if (!r.error.empty()) e["error"] = r.error;
    arr.push_back(e);
  }
  return arr.dump(2) + "\n";
}

std::string cost_json(const CostReport& report) {
  json j;
  j["iterations"] = report.iterations;
  json runs = json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"label", r.label},
                    {"method", r.method},
                    {"seconds", r.seconds},
                    {"median_seconds", r.median_seconds}});
  }
  j["runs"] = runs;
  j["dqrk_over_qrk"] = opt(report.dqrk_over_qrk);
  return j.dump(2) + "\n";
}

std::string cost_csv(const CostReport& report) {
  std::string out = "label,method,iterations,repeats,median_seconds\n";
  for (const auto& r : report.runs) {
    out += quoted(r.label) + "," + quoted(r.method) + "," + std::to_string(report.iterations) +
           "," + std::to_string(r.seconds.size()) + "," + format_double(r.median_seconds) + "\n";
  }
  return out;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  const auto parent = path.parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + parent.string() + ": " + ec.message());
  }
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot open " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    std::filesystem::remove(tmp, ignore);
    throw Error(ErrorCode::kIoError, "cannot rename to " + path.string() + ": " + ec.message());
  }
}

std::vector<std::filesystem::path> emit_artifacts(const ExperimentResult& result,
                                                  ArtifactFormat format,
                                                  const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (auto kind : result.spec.outputs) {
    switch (kind) {
      case ArtifactKind::kTrajectoryCsv:
        written.push_back(dir / "trajectory.csv");
        write_file_atomically(written.back(), trajectory_csv(result));
        break;
      case ArtifactKind::kSummaryJson:
        written.push_back(dir / "summary.json");
        write_file_atomically(written.back(), summary_json(result));
        break;
      case ArtifactKind::kThresholdTable: {
        if (!result.spec.threshold) {
          throw Error(ErrorCode::kInvalidArgument, "threshold_table output needs a threshold");
        }
        const auto table = threshold_from_experiment(result, *result.spec.threshold);
        if (format == ArtifactFormat::kCsv) {
          written.push_back(dir / "threshold.csv");
          write_file_atomically(written.back(), threshold_csv(table));
        } else {
          written.push_back(dir / "threshold.json");
          write_file_atomically(written.back(), threshold_json(table));
        }
        break;
      }
    }
  }
  return written;
}

}  // namespace kaczmarz::harness
