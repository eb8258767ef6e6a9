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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {

// Row-selection strategies. Each samples from a block of the rows ordered
// by normalized residual; Motzkin is the deterministic greedy limit.

/// Sample every row with probability |a_i|^2 / |A|_F^2.
struct Rk {};
/// Sample among the round(q*m) smallest residuals.
struct Qrk {
  double q = 0.8;
};
/// Sample among residuals above the q-quantile (the m - round(q*m) largest).
struct Rqrk {
  double q = 0.5;
};
/// Sample among residuals above the q0-quantile and at most the q1-quantile.
struct Dqrk {
  double q0 = 0.6;
  double q1 = 0.8;
};
/// Always the largest residual; ties go to the smallest row index.
struct Motzkin {};

using SelectorKind = std::variant<Rk, Qrk, Rqrk, Dqrk, Motzkin>;

/// "rk", "qrk", "rqrk", "dqrk", "motzkin".
std::string method_name(const SelectorKind& kind);
/// Method name plus parameters, e.g. "dqrk(q0=0.6,q1=0.8)".
std::string describe(const SelectorKind& kind);
bool needs_residuals(const SelectorKind& kind);

/// Throws kInvalidQuantiles for out-of-range parameters and
/// kEmptyAdmissibleSet when rounding leaves a block with no rows for m.
void validate_selector(const SelectorKind& kind, std::size_t m);

struct GroundTruth {
  Vector x_star;
  Vector b_true;
  std::vector<std::size_t> corrupt_support;  // ascending
  double beta = 0.0;
};

/// A x = b with optional planted solution and corruption metadata.
struct DenseSystem {
  DenseMatrix a;
  Vector b;
  std::optional<GroundTruth> truth;

  std::size_t rows() const noexcept { return a.rows(); }
  std::size_t cols() const noexcept { return a.cols(); }
  /// Dimensions, finiteness, |support| <= beta*m, and b - b_t vanishing off
  /// the support.
  void validate() const;
};

struct OriginStart {};
/// x0 = (b_i / |a_i|^2) a_i. With no row given, i is drawn uniformly from
/// the solve's own stream.
struct HyperplaneStart {
  std::optional<std::size_t> row;
};
using StartPolicy = std::variant<OriginStart, HyperplaneStart>;

struct StopRule {
  std::optional<double> squared_error;  // needs ground truth
  std::optional<double> residual_norm;
};

struct SolverConfig {
  SelectorKind selector = Rk{};
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  StartPolicy start = OriginStart{};
  StopRule stop;
  bool record = true;
  std::size_t record_every = 1;
};

/// State after iteration `iteration`: the row projected onto to reach it,
/// quantile thresholds used in that selection, and the resulting errors.
struct IterationRecord {
  std::size_t iteration = 0;
  std::optional<std::size_t> row;
  std::optional<double> lower_value;  // Q0 (rqRK threshold, dqRK lower)
  std::optional<double> upper_value;  // Q1 (qRK / dqRK upper)
  std::optional<double> squared_error;
  std::optional<double> residual_norm;  // | normalized residual vector |_2
};

enum class Termination { kMaxIterations, kErrorThreshold, kResidualThreshold, kFailed };
std::string to_string(Termination t);

struct SolveTrace {
  std::vector<IterationRecord> records;
  Vector x_final;
  std::size_t iterations = 0;
  Termination termination = Termination::kMaxIterations;
  std::string failure;  // message when termination == kFailed
  std::optional<double> final_squared_error;
};

struct Selection {
  std::size_t row = 0;
  std::optional<double> lower_value;
  std::optional<double> upper_value;
};

/// Index i with probability weights[i] / sum(weights).
std::size_t weighted_sample(std::span<const double> weights, Rng& rng);

/// Reusable row selector for one matrix. Holds the squared row norms and a
/// scratch permutation so that the inner loop does not allocate.
class RowSelector {
 public:
  RowSelector(SelectorKind kind, std::span<const double> row_sq_norms);

  const SelectorKind& kind() const noexcept { return kind_; }
  std::size_t rows() const noexcept { return sq_norms_.size(); }

  Selection select(std::span<const double> residuals, Rng& rng);

  /// Exact selection law for these residuals: (row, probability) pairs,
  /// rows ascending.
  std::vector<std::pair<std::size_t, double>> distribution(
      std::span<const double> residuals);

  /// Rows the selector may pick for these residuals, ascending.
  std::vector<std::size_t> admissible_rows(std::span<const double> residuals);

 private:
  struct Block {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::optional<double> lower_value;
    std::optional<double> upper_value;
  };
  Block partition(std::span<const double> residuals);
  std::size_t sample_block(const Block& block, Rng& rng) const;

  SelectorKind kind_;
  std::vector<double> sq_norms_;
  std::vector<double> cumulative_;  // prefix sums for RK on unequal rows
  bool uniform_ = true;
  std::size_t lower_rank_ = 0;
  std::size_t upper_rank_ = 0;
  // (residual, row) pairs; lexicographic order is the tie rule.
  std::vector<std::pair<double, std::size_t>> order_;
};

/// One-shot selection; equivalent to RowSelector(kind, norms).select(...).
Selection select_row(const SelectorKind& kind, std::span<const double> residuals,
                     std::span<const double> row_sq_norms, Rng& rng);

struct StepResult {
  Vector x_next;
  IterationRecord record;
};

/// One Kaczmarz step from x: residuals, selection, projection.
StepResult step(const DenseSystem& system, const Vector& x, const SelectorKind& kind,
                Rng& rng);

/// x0 for a policy; HyperplaneStart without a row consumes one draw of rng.
Vector initial_iterate(const DenseSystem& system, const StartPolicy& start, Rng& rng);

/// Runs up to max_iters steps. Deterministic in (system, config). Invalid
/// configurations throw; errors raised mid-run end the trace with kFailed.
SolveTrace solve(const DenseSystem& system, const SolverConfig& config);

}  // namespace kaczmarz
