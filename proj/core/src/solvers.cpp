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

#include "kaczmarz/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/problems.hpp"
#include "kaczmarz/quantiles.hpp"

namespace kaczmarz {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

constexpr double kUniformRowTolerance = 1e-12;

}  // namespace

std::string method_name(const SelectorKind& kind) {
  return std::visit(Overloaded{
                        [](const Rk&) { return std::string("rk"); },
                        [](const Qrk&) { return std::string("qrk"); },
                        [](const Rqrk&) { return std::string("rqrk"); },
                        [](const Dqrk&) { return std::string("dqrk"); },
                        [](const Motzkin&) { return std::string("motzkin"); },
                    },
                    kind);
}

std::string describe(const SelectorKind& kind) {
  return std::visit(
      Overloaded{
          [](const Rk&) { return std::string("rk"); },
          [](const Qrk& s) { return "qrk(q=" + format_number(s.q) + ")"; },
          [](const Rqrk& s) { return "rqrk(q=" + format_number(s.q) + ")"; },
          [](const Dqrk& s) {
            return "dqrk(q0=" + format_number(s.q0) + ",q1=" + format_number(s.q1) + ")";
          },
          [](const Motzkin&) { return std::string("motzkin"); },
      },
      kind);
}

bool needs_residuals(const SelectorKind& kind) { return !std::holds_alternative<Rk>(kind); }

void validate_selector(const SelectorKind& kind, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "system has no rows");
  const double md = static_cast<double>(m);
  const auto empty = [&](const std::string& why) {
    throw Error(ErrorCode::kEmptyAdmissibleSet,
                describe(kind) + " leaves no admissible rows for m = " + std::to_string(m) +
                    " (" + why + ")");
  };
  std::visit(Overloaded{
                 [](const Rk&) {},
                 [](const Motzkin&) {},
                 [&](const Qrk& s) {
                   if (!(s.q > 0.0 && s.q < 1.0)) {
                     throw Error(ErrorCode::kInvalidQuantiles, "qrk needs q in (0, 1)");
                   }
                   if (quantile_rank(s.q, m) == 0) empty("round(q*m) = 0");
                 },
                 [&](const Rqrk& s) {
                   const double slack = 1e-12;
                   if (!(s.q >= 1.0 / md - slack && s.q <= (md - 1.0) / md + slack)) {
                     throw Error(ErrorCode::kInvalidQuantiles,
                                 "rqrk needs 1/m <= q <= (m-1)/m, got q = " +
                                     format_number(s.q));
                   }
                   const std::size_t k = quantile_rank(s.q, m);
                   if (k == 0 || k >= m) empty("round(q*m) not in [1, m-1]");
                 },
                 [&](const Dqrk& s) {
                   if (!(s.q0 > 0.0 && s.q0 < s.q1 && s.q1 <= 1.0)) {
                     throw Error(ErrorCode::kInvalidQuantiles, "dqrk needs 0 < q0 < q1 <= 1");
                   }
                   if (quantile_rank(s.q1, m) <= quantile_rank(s.q0, m)) {
                     empty("round(q0*m) >= round(q1*m)");
                   }
                 },
             },
             kind);
}

void DenseSystem::validate() const {
  if (static_cast<std::size_t>(b.size()) != rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "b length differs from row count");
  }
  require_finite(b, "b");
  if (!truth) return;
  const auto& t = *truth;
  if (static_cast<std::size_t>(t.x_star.size()) != cols() ||
      static_cast<std::size_t>(t.b_true.size()) != rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "ground truth dimensions");
  }
  const double limit = t.beta * static_cast<double>(rows());
  if (static_cast<double>(t.corrupt_support.size()) > std::floor(limit + 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "corruption support exceeds beta*m");
  }
  std::vector<char> corrupt(rows(), 0);
  for (std::size_t i : t.corrupt_support) {
    if (i >= rows()) throw Error(ErrorCode::kInvalidArgument, "support index out of range");
    corrupt[i] = 1;
  }
  for (std::size_t i = 0; i < rows(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!corrupt[i] && b(ii) != t.b_true(ii)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "b differs from b_t at row " + std::to_string(i) + " outside the support");
    }
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kErrorThreshold: return "error_threshold";
    case Termination::kResidualThreshold: return "residual_threshold";
    case Termination::kFailed: return "failed";
  }
  return "unknown";
}

std::size_t weighted_sample(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be finite and nonnegative");
    }
    total += weights[i];
    if (weights[i] > 0.0) last_positive = i;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kAllZeroWeights, "no positive weight");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc && weights[i] > 0.0) return i;
  }
  return last_positive;
}

RowSelector::RowSelector(SelectorKind kind, std::span<const double> row_sq_norms)
    : kind_(kind), sq_norms_(row_sq_norms.begin(), row_sq_norms.end()) {
  const std::size_t m = sq_norms_.size();
  validate_selector(kind_, m);
  const double first = sq_norms_.front();
  for (double w : sq_norms_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "row norms must be finite");
    }
    if (std::abs(w - first) > kUniformRowTolerance * std::max(first, w)) uniform_ = false;
  }
  if (!(first > 0.0) && uniform_) {
    throw Error(ErrorCode::kAllZeroWeights, "every row is zero");
  }
  if (!uniform_) {
    cumulative_.resize(m);
    std::partial_sum(sq_norms_.begin(), sq_norms_.end(), cumulative_.begin());
  }
  std::visit(Overloaded{
                 [&](const Rk&) { upper_rank_ = m; },
                 [&](const Motzkin&) { upper_rank_ = m; },
                 [&](const Qrk& s) { upper_rank_ = quantile_rank(s.q, m); },
                 [&](const Rqrk& s) {
                   lower_rank_ = quantile_rank(s.q, m);
                   upper_rank_ = m;
                 },
                 [&](const Dqrk& s) {
                   lower_rank_ = quantile_rank(s.q0, m);
                   upper_rank_ = quantile_rank(s.q1, m);
                 },
             },
             kind_);
  order_.resize(m);
}

RowSelector::Block RowSelector::partition(std::span<const double> residuals) {
  const std::size_t m = rows();
  if (residuals.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "residual length differs from row count");
  }
  for (std::size_t i = 0; i < m; ++i) order_[i] = {residuals[i], i};
  const auto at = [this](std::size_t r) { return order_.begin() + static_cast<std::ptrdiff_t>(r); };

  Block block{lower_rank_, upper_rank_, std::nullopt, std::nullopt};
  if (upper_rank_ < m) {
    std::nth_element(order_.begin(), at(upper_rank_ - 1), order_.end());
    block.upper_value = order_[upper_rank_ - 1].first;
  }
  if (lower_rank_ > 0) {
    std::nth_element(order_.begin(), at(lower_rank_ - 1), at(upper_rank_));
    block.lower_value = order_[lower_rank_ - 1].first;
  }
  return block;
}

std::size_t RowSelector::sample_block(const Block& block, Rng& rng) const {
  const std::size_t size = block.end - block.begin;
  if (uniform_) return order_[block.begin + rng.uniform_index(size)].second;
  double total = 0.0;
  for (std::size_t r = block.begin; r < block.end; ++r) total += sq_norms_[order_[r].second];
  if (!(total > 0.0)) throw Error(ErrorCode::kAllZeroWeights, "admissible rows are all zero");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = order_[block.begin].second;
  for (std::size_t r = block.begin; r < block.end; ++r) {
    const std::size_t i = order_[r].second;
    if (sq_norms_[i] <= 0.0) continue;
    acc += sq_norms_[i];
    last = i;
    if (target < acc) return i;
  }
  return last;
}

Selection RowSelector::select(std::span<const double> residuals, Rng& rng) {
  const std::size_t m = rows();
  if (std::holds_alternative<Rk>(kind_)) {
    if (uniform_) return {rng.uniform_index(m), std::nullopt, std::nullopt};
    const double target = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), m - 1);
    while (sq_norms_[i] <= 0.0 && i > 0) --i;
    return {i, std::nullopt, std::nullopt};
  }
  if (residuals.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "residual length differs from row count");
  }
  if (std::holds_alternative<Motzkin>(kind_)) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (residuals[i] > residuals[best]) best = i;
    }
    return {best, std::nullopt, std::nullopt};
  }
  const Block block = partition(residuals);
  return {sample_block(block, rng), block.lower_value, block.upper_value};
}

std::vector<std::size_t> RowSelector::admissible_rows(std::span<const double> residuals) {
  std::vector<std::size_t> out;
  const auto law = distribution(residuals);
  for (const auto& [row, p] : law) out.push_back(row);
  return out;
}

std::vector<std::pair<std::size_t, double>> RowSelector::distribution(
    std::span<const double> residuals) {
  const std::size_t m = rows();
  std::vector<std::size_t> rows_in;
  if (std::holds_alternative<Motzkin>(kind_)) {
    if (residuals.size() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "residual length differs from row count");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (residuals[i] > residuals[best]) best = i;
    }
    return {{best, 1.0}};
  }
  if (std::holds_alternative<Rk>(kind_)) {
    rows_in.resize(m);
    std::iota(rows_in.begin(), rows_in.end(), std::size_t{0});
  } else {
    const Block block = partition(residuals);
    for (std::size_t r = block.begin; r < block.end; ++r) rows_in.push_back(order_[r].second);
    std::sort(rows_in.begin(), rows_in.end());
  }
  double total = 0.0;
  for (std::size_t i : rows_in) total += uniform_ ? 1.0 : sq_norms_[i];
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(rows_in.size());
  for (std::size_t i : rows_in) {
    const double w = uniform_ ? 1.0 : sq_norms_[i];
    if (w > 0.0) out.emplace_back(i, w / total);
  }
  return out;
}

Selection select_row(const SelectorKind& kind, std::span<const double> residuals,
                     std::span<const double> row_sq_norms, Rng& rng) {
  RowSelector selector(kind, row_sq_norms);
  return selector.select(residuals, rng);
}

namespace {

// Shared inner loop state for step() and solve().
class Iteration {
 public:
  Iteration(const DenseSystem& system, const SelectorKind& kind)
      : system_(system),
        sq_norms_(system.a.values().rowwise().squaredNorm()),
        norms_(sq_norms_.cwiseSqrt()),
        selector_(kind, std::span<const double>(sq_norms_.data(),
                                                static_cast<std::size_t>(sq_norms_.size()))),
        residuals_(system.a.rows()) {
    for (Eigen::Index i = 0; i < norms_.size(); ++i) {
      if (norms_(i) < kZeroRowTolerance) {
        throw ZeroRowError(static_cast<std::size_t>(i));
      }
    }
  }

  /// Normalized residuals of x into the internal buffer; returns their norm.
  double compute_residuals(const Vector& x) {
    residuals_.noalias() = system_.a.values() * x;
    residuals_ -= system_.b;
    residuals_ = residuals_.cwiseAbs().cwiseQuotient(norms_);
    return residuals_.norm();
  }

  std::span<const double> residuals() const {
    return {residuals_.data(), static_cast<std::size_t>(residuals_.size())};
  }

  /// Selects a row using the last computed residuals and projects x in place.
  Selection advance(Vector& x, Rng& rng) {
    const Selection s = selector_.select(residuals(), rng);
    const auto i = static_cast<Eigen::Index>(s.row);
    const auto row = system_.a.values().row(i);
    const double sq = sq_norms_(i);
    if (sq < kZeroRowTolerance * kZeroRowTolerance) throw ZeroRowError(s.row);
    const double coeff = (system_.b(i) - row.dot(x)) / sq;
    x += coeff * row.transpose();
    return s;
  }

 private:
  const DenseSystem& system_;
  Vector sq_norms_;
  Vector norms_;
  RowSelector selector_;
  Vector residuals_;
};

}  // namespace

StepResult step(const DenseSystem& system, const Vector& x, const SelectorKind& kind,
                Rng& rng) {
  if (static_cast<std::size_t>(x.size()) != system.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "iterate length differs from column count");
  }
  Iteration it(system, kind);
  IterationRecord record;
  if (needs_residuals(kind)) it.compute_residuals(x);
  StepResult out{x, {}};
  const Selection s = it.advance(out.x_next, rng);
  out.record.iteration = 1;
  out.record.row = s.row;
  out.record.lower_value = s.lower_value;
  out.record.upper_value = s.upper_value;
  if (system.truth) out.record.squared_error = (out.x_next - system.truth->x_star).squaredNorm();
  return out;
}

Vector initial_iterate(const DenseSystem& system, const StartPolicy& start, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const OriginStart&) -> Vector {
                          return Vector::Zero(static_cast<Eigen::Index>(system.cols()));
                        },
                        [&](const HyperplaneStart& h) -> Vector {
                          const std::size_t i =
                              h.row ? *h.row : rng.uniform_index(system.rows());
                          if (i >= system.rows()) {
                            throw Error(ErrorCode::kInvalidArgument,
                                        "hyperplane start row " + std::to_string(i) +
                                            " out of range");
                          }
                          return initial_iterate_on_hyperplane(system.a, system.b, i);
                        },
                    },
                    start);
}

SolveTrace solve(const DenseSystem& system, const SolverConfig& config) {
  if (config.record && config.record_every == 0) {
    throw Error(ErrorCode::kInvalidArgument, "record_every must be positive");
  }
  if (config.stop.squared_error && !system.truth) {
    throw Error(ErrorCode::kInvalidArgument, "error-threshold stop needs ground truth");
  }
  if (system.b.size() != static_cast<Eigen::Index>(system.rows())) {
    throw Error(ErrorCode::kDimensionMismatch, "b length differs from row count");
  }
  validate_selector(config.selector, system.rows());

  Rng rng(config.seed);
  Iteration it(system, config.selector);
  SolveTrace trace;
  Vector x = initial_iterate(system, config.start, rng);

  const bool selector_needs = needs_residuals(config.selector);
  const bool have_truth = system.truth.has_value();
  IterationRecord pending;
  pending.iteration = 0;
  bool last_recorded = false;

  for (std::size_t k = 0;; ++k) {
    const bool record_now = config.record && k % config.record_every == 0;
    const bool need_residuals = selector_needs || record_now || config.stop.residual_norm;
    std::optional<double> residual_norm;
    if (need_residuals) residual_norm = it.compute_residuals(x);
    std::optional<double> sq_error;
    if (have_truth && (record_now || config.stop.squared_error || k == config.max_iters)) {
      sq_error = (x - system.truth->x_star).squaredNorm();
    }
    last_recorded = record_now;
    if (record_now) {
      pending.squared_error = sq_error;
      pending.residual_norm = residual_norm;
      trace.records.push_back(pending);
    }
    trace.iterations = k;

    if (config.stop.squared_error && sq_error && *sq_error <= *config.stop.squared_error) {
      trace.termination = Termination::kErrorThreshold;
      break;
    }
    if (config.stop.residual_norm && residual_norm &&
        *residual_norm <= *config.stop.residual_norm) {
      trace.termination = Termination::kResidualThreshold;
      break;
    }
    if (k == config.max_iters) {
      trace.termination = Termination::kMaxIterations;
      break;
    }
    try {
      const Selection s = it.advance(x, rng);
      pending = IterationRecord{k + 1, s.row, s.lower_value, s.upper_value, std::nullopt,
                                std::nullopt};
    } catch (const Error& e) {
      trace.termination = Termination::kFailed;
      trace.failure = e.what();
      break;
    }
  }

  if (config.record && !last_recorded) {
    pending.residual_norm = it.compute_residuals(x);
    if (have_truth) pending.squared_error = (x - system.truth->x_star).squaredNorm();
    trace.records.push_back(pending);
  }
  if (have_truth) trace.final_squared_error = (x - system.truth->x_star).squaredNorm();
  trace.x_final = std::move(x);
  return trace;
}

}  // namespace kaczmarz
