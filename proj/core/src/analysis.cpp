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

#include "kaczmarz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/quantiles.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {
namespace {

double sq(double v) { return v * v; }

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace

std::uint64_t binomial(std::uint64_t m, std::uint64_t s) {
  if (s > m) return 0;
  s = std::min(s, m - s);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= s; ++i) {
    // result * (m - s + i) / i stays integral at every step.
    const std::uint64_t factor = m - s + i;
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t reduced = result / g;
    const std::uint64_t divisor = i / g;
    const std::uint64_t f = factor / divisor;  // divisor | factor after reduction
    if (reduced > kMax / f) return kMax;
    result = reduced * f;
  }
  return result;
}

double sigma_alpha_min_exact(const DenseMatrix& a, double alpha, std::uint64_t subset_budget) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t s = quantile_rank(alpha, m);
  if (s < n) return 0.0;
  const std::uint64_t count = binomial(m, s);
  if (count > subset_budget) throw BudgetExceededError(count, subset_budget);

  // Lexicographic walk over s-subsets of [m].
  std::vector<std::size_t> subset(s);
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  Matrix block(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n));
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t r = 0; r < s; ++r) {
      block.row(static_cast<Eigen::Index>(r)) = a.values().row(static_cast<Eigen::Index>(subset[r]));
    }
    best = std::min(best, smallest_singular_value(block));
    std::size_t pos = s;
    while (pos > 0 && subset[pos - 1] == m - s + pos - 1) --pos;
    if (pos == 0) break;
    ++subset[pos - 1];
    for (std::size_t r = pos; r < s; ++r) subset[r] = subset[r - 1] + 1;
  }
  return best;
}

double sigma_alpha_min_leave_one_out(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  require(m >= 2, ErrorCode::kInvalidArgument, "leave-one-out needs at least two rows");
  if (m - 1 < n) return 0.0;

  // With A = QR (thin), A_{-i}^T A_{-i} = R^T (I - q q^T) R for q = Q(i, :),
  // and (I - q q^T) = M^T M with M = I - c q q^T / |q|^2, c = 1 - sqrt(1 - |q|^2).
  // So sigma(A_{-i}) = sigma(M R), an n x n problem.
  const Eigen::MatrixXd dense = a.values();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dense);
  const Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(dense.rows(), dense.cols());
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(dense.cols()).triangularView<Eigen::Upper>();

  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd reduced(dense.cols(), dense.cols());
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    const Eigen::VectorXd q = thin_q.row(i).transpose();
    const double leverage = q.squaredNorm();
    reduced = r;
    if (leverage > 0.0) {
      const double c = 1.0 - std::sqrt(std::max(0.0, 1.0 - leverage));
      const Eigen::RowVectorXd qr_row = q.transpose() * r;
      reduced.noalias() -= (c / leverage) * q * qr_row;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(reduced);
    if (svd.info() != Eigen::Success) throw ConvergenceError("leave-one-out SVD did not converge");
    best = std::min(best, svd.singularValues()(dense.cols() - 1));
  }
  return best;
}

double sigma_alpha_min_sampled(const DenseMatrix& a, double alpha, std::size_t trials,
                               std::uint64_t seed) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  require(trials >= 1, ErrorCode::kInvalidArgument, "trials must be positive");
  const std::size_t m = a.rows();
  const std::size_t s = quantile_rank(alpha, m);
  if (s < a.cols()) return 0.0;

  // Draw every subset up front so the result does not depend on evaluation order.
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> subsets(trials);
  std::vector<std::size_t> pool(m);
  for (auto& subset : subsets) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) std::swap(pool[i], pool[i + rng.uniform_index(m - i)]);
    subset.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& subset : subsets) {
    best = std::min(best, smallest_singular_value(gather_rows(a.values(), subset)));
  }
  return best;
}

std::optional<SpectralEntry> SpectralProfile::find(double alpha, std::size_t m) const {
  const std::size_t s = quantile_rank(alpha, m);
  for (const auto& e : entries) {
    if (quantile_rank(e.alpha, m) == s) return e;
  }
  return std::nullopt;
}

SpectralProfile spectral_profile(const DenseMatrix& a, std::span<const double> alphas,
                                 std::size_t sampled_trials, std::uint64_t seed,
                                 std::uint64_t subset_budget) {
  const auto range = extreme_singular_values(a);
  SpectralProfile profile{range.min, range.max, {}};
  const std::size_t m = a.rows();
  for (double alpha : alphas) {
    const std::size_t s = quantile_rank(alpha, m);
    SpectralEntry entry{alpha, 0.0, SpectralMode::kExact, 0};
    if (s < a.cols()) {
      entry.value = 0.0;
    } else if (s == m) {
      entry.value = range.min;
    } else if (binomial(m, s) <= subset_budget) {
      entry.value = sigma_alpha_min_exact(a, alpha, subset_budget);
    } else if (s + 1 == m) {
      entry.value = sigma_alpha_min_leave_one_out(a);
    } else {
      entry.value = sigma_alpha_min_sampled(a, alpha, sampled_trials, seed);
      entry.mode = SpectralMode::kSampledUpperBound;
      entry.trials = sampled_trials;
    }
    profile.entries.push_back(entry);
  }
  return profile;
}

double BoundReport::envelope(std::size_t k) const {
  if (k == 0) return 1.0;
  return first_step_factor * std::pow(per_step_factor, static_cast<double>(k - 1));
}

double corruption_penalty(double q, double beta) {
  const double room = 1.0 - q - beta;
  require(room > 0.0, ErrorCode::kHypothesisViolation, "needs q + beta < 1");
  return 2.0 * std::sqrt(beta) / std::sqrt(room) + beta / room;
}

BoundReport rk_bound(double sigma_min, double frobenius_sq) {
  require(frobenius_sq > 0.0, ErrorCode::kInvalidArgument, "|A|_F^2 must be positive");
  BoundReport r;
  r.method = "rk";
  r.per_step_factor = 1.0 - sq(sigma_min) / frobenius_sq;
  r.first_step_factor = r.per_step_factor;
  r.inputs = {{"sigma_min", sigma_min}, {"frobenius_sq", frobenius_sq}};
  return r;
}

BoundReport rqrk_bound(double sigma_min, double sigma_q_min,
                       std::span<const double> row_sq_norms, double q, bool hyperplane_start) {
  const std::size_t m = row_sq_norms.size();
  require(m >= 2, ErrorCode::kInvalidArgument, "need at least two rows");
  const double md = static_cast<double>(m);
  const double slack = 1e-12;
  if (!(q >= 1.0 / md - slack && q <= (md - 1.0) / md + slack)) {
    throw Error(ErrorCode::kInvalidQuantiles, "rqrk bound needs 1/m <= q <= (m-1)/m");
  }
  const double frob = std::accumulate(row_sq_norms.begin(), row_sq_norms.end(), 0.0);
  const auto [lo, hi] = std::minmax_element(row_sq_norms.begin(), row_sq_norms.end());
  require(*lo > 0.0, ErrorCode::kZeroRow, "rqrk bound needs nonzero rows");

  const bool unit_rows = std::all_of(row_sq_norms.begin(), row_sq_norms.end(),
                                     [](double w) { return std::abs(w - 1.0) <= 1e-12; });
  BoundReport r;
  r.method = "rqrk";
  const double rk_term = unit_rows ? sq(sigma_min) / md : sq(sigma_min) / frob;
  const double quantile_term = unit_rows ? sq(sigma_q_min) / (q * md * md)
                                         : sq(sigma_q_min) / (q * md) * (*lo / frob) / *hi;
  r.per_step_factor = 1.0 - rk_term - quantile_term;
  r.first_step_factor = hyperplane_start ? r.per_step_factor : 1.0 - rk_term;
  r.inputs = {{"sigma_min", sigma_min}, {"sigma_q_min", sigma_q_min}, {"q", q},
              {"m", md},                {"frobenius_sq", frob},       {"hyperplane_start", hyperplane_start ? 1.0 : 0.0}};
  return r;
}

BoundReport dqrk_bound(double sigma_max, double sigma_q1beta_min, double sigma_q0beta_min,
                       double q0, double q1, double beta, std::size_t m) {
  require(m >= 1, ErrorCode::kInvalidArgument, "m must be positive");
  require(beta >= 0.0, ErrorCode::kHypothesisViolation, "beta must be nonnegative");
  require(beta < q0, ErrorCode::kHypothesisViolation, "needs beta < q0");
  require(q0 < q1, ErrorCode::kHypothesisViolation, "needs q0 < q1");
  require(q1 < 1.0 - beta, ErrorCode::kHypothesisViolation, "needs q1 < 1 - beta");
  require(q1 - q0 > beta, ErrorCode::kHypothesisViolation, "needs q1 - q0 > beta");

  const double md = static_cast<double>(m);
  const double width = q1 - q0;
  const double penalty = corruption_penalty(q1, beta);
  const double c = (width - beta) * (sq(sigma_q1beta_min) / (width * q1 * md) +
                                     sq(sigma_q0beta_min) / (width * q0 * q1 * md * md)) -
                   sq(sigma_max) / (width * md) * penalty;
  const double lhs = q1 / (width - beta) * penalty;
  const double rhs = (sq(sigma_q1beta_min) + sq(sigma_q0beta_min) / (q0 * md)) / sq(sigma_max);

  BoundReport r;
  r.method = "dqrk";
  r.contraction = c;
  r.per_step_factor = 1.0 - c;
  r.first_step_factor = r.per_step_factor;
  r.sufficient_condition_holds = lhs < rhs;
  r.inputs = {{"sigma_max", sigma_max}, {"sigma_q1_beta_min", sigma_q1beta_min},
              {"sigma_q0_beta_min", sigma_q0beta_min}, {"q0", q0}, {"q1", q1},
              {"beta", beta}, {"m", md}};
  return r;
}

BoundReport qrk_bound(double sigma_max, double sigma_qbeta_min, double q, double beta,
                      std::size_t m) {
  require(m >= 1, ErrorCode::kInvalidArgument, "m must be positive");
  require(beta >= 0.0, ErrorCode::kHypothesisViolation, "beta must be nonnegative");
  require(beta < q, ErrorCode::kHypothesisViolation, "needs beta < q");
  require(q < 1.0 - beta, ErrorCode::kHypothesisViolation, "needs q < 1 - beta");

  const double md = static_cast<double>(m);
  const double penalty = corruption_penalty(q, beta);
  const double c = (q - beta) * sq(sigma_qbeta_min) / (q * q * md) -
                   sq(sigma_max) / (q * md) * penalty;
  BoundReport r;
  r.method = "qrk";
  r.contraction = c;
  r.per_step_factor = 1.0 - c;
  r.first_step_factor = r.per_step_factor;
  r.sufficient_condition_holds = q / (q - beta) * penalty < sq(sigma_qbeta_min) / sq(sigma_max);
  r.inputs = {{"sigma_max", sigma_max}, {"sigma_q_beta_min", sigma_qbeta_min}, {"q", q},
              {"beta", beta}, {"m", md}};
  return r;
}

double kth_largest_factor(double sigma_km_min, double sigma_k1m_min, std::size_t k) {
  require(k >= 2, ErrorCode::kInvalidArgument, "k must be at least 2; use rqrk_bound for k = 1");
  const double kd = static_cast<double>(k);
  return 1.0 - sq(sigma_km_min) / kd - sq(sigma_k1m_min) / (kd * kd - kd);
}

double e_diagnostic(double sigma_max, double sigma_loo_min, double q0, double q1, double beta,
                    std::size_t m, PenaltyForm form) {
  require(q0 > 0.0, ErrorCode::kHypothesisViolation, "needs q0 > 0");
  require(q1 + beta < 1.0, ErrorCode::kHypothesisViolation, "needs q1 + beta < 1");
  require(q1 - q0 > beta, ErrorCode::kHypothesisViolation, "needs q1 - q0 > beta");
  require(sigma_max > 0.0, ErrorCode::kInvalidArgument, "sigma_max must be positive");
  const double md = static_cast<double>(m);
  const double redundancy = (sq(sigma_loo_min) + sq(sigma_loo_min) / (q0 * md)) / sq(sigma_max);
  const double multiplier =
      form == PenaltyForm::kTheorem ? q1 / (q1 - q0 - beta) : q1 / (1.0 - q0 - beta);
  return redundancy - multiplier * corruption_penalty(q1, beta);
}

namespace {

std::vector<std::pair<std::size_t, double>> selection_law(const DenseSystem& system,
                                                          const Vector& x,
                                                          const SelectorKind& kind) {
  const Vector sq_norms = system.a.values().rowwise().squaredNorm();
  const Vector residuals = normalized_residuals(system.a, system.b, x);
  RowSelector selector(kind, std::span<const double>(sq_norms.data(),
                                                     static_cast<std::size_t>(sq_norms.size())));
  return selector.distribution(std::span<const double>(
      residuals.data(), static_cast<std::size_t>(residuals.size())));
}

}  // namespace

double expected_one_step_ratio(const DenseSystem& system, const Vector& x,
                               const Vector& x_star, const SelectorKind& kind) {
  const double start = (x - x_star).squaredNorm();
  require(start > 0.0, ErrorCode::kInvalidArgument, "x equals x*");
  double expectation = 0.0;
  for (const auto& [row, p] : selection_law(system, x, kind)) {
    const Vector next = project_onto_row(x, RowView::of(system.a, row),
                                         system.b(static_cast<Eigen::Index>(row)));
    expectation += p * (next - x_star).squaredNorm();
  }
  return expectation / start;
}

double expected_projection_gain(const DenseSystem& system, const Vector& x,
                                const Vector& x_star, const SelectorKind& kind) {
  const Vector e = x - x_star;
  const double norm = e.norm();
  require(norm > 0.0, ErrorCode::kInvalidArgument, "x equals x*");
  double gain = 0.0;
  for (const auto& [row, p] : selection_law(system, x, kind)) {
    const auto a_row = system.a.values().row(static_cast<Eigen::Index>(row));
    gain += p * sq(a_row.dot(e) / (norm * a_row.norm()));
  }
  return gain;
}

void DiscreteLemmaInstance::validate() const {
  const std::size_t n = p.size();
  require(n >= 2, ErrorCode::kInvalidArgument, "need n >= 2");
  require(f.size() == n, ErrorCode::kDimensionMismatch, "p and f differ in length");
  require(ell >= 1 && ell < n, ErrorCode::kInvalidArgument, "need 1 <= ell < n");
  double total = 0.0;
  for (double pk : p) {
    require(pk > 0.0 && std::isfinite(pk), ErrorCode::kInvalidArgument, "p must be positive");
    total += pk;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::kInvalidArgument, "p must sum to 1");
  for (std::size_t k = 1; k < n; ++k) {
    require(f[k - 1] <= f[k], ErrorCode::kInvalidArgument, "f must be non-decreasing");
  }
}

LemmaOracle lemma1_oracle(const DiscreteLemmaInstance& instance) {
  instance.validate();
  const auto& p = instance.p;
  const auto& f = instance.f;
  const std::size_t n = p.size();
  const std::size_t ell = instance.ell;

  double head = 0.0;
  for (std::size_t k = 0; k < ell; ++k) head += p[k];
  if (head >= 1.0 - 1e-12) {
    throw Error(ErrorCode::kDegenerateConditioning, "P(X > ell) is numerically zero");
  }

  LemmaOracle out;
  double tail_mass = 0.0;
  double tail = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.ef_x += p[k] * f[k];
    if (k >= ell) {
      tail += p[k] * f[k];
      tail_mass += p[k];
    }
  }
  out.ef_y = tail / tail_mass;
  // f is 0-indexed here: f[ell] is f(ell + 1) in 1-indexed terms.
  out.lemma_lower_bound = out.ef_x + (f[ell] - f[ell - 1]) * head;

  double telescoped = 0.0;
  double before = 0.0;
  for (std::size_t k = 0; k < ell; ++k) {
    const double conditional = p[k] / (1.0 - before);
    telescoped += (f[k + 1] - f[k]) * conditional;
    before += p[k];
  }
  out.corollary_lower_bound = out.ef_x + telescoped;
  return out;
}

}  // namespace kaczmarz
