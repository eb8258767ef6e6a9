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
#include <vector>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz {

// ---------------------------------------------------------------------------
// Sub-matrix singular values.
//
// sigma_{alpha,min}(A) is the minimum of sigma_min(A_S) over row subsets S
// with |S| = round(alpha*m). It is 0 whenever that size is below n.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultSubsetBudget = 1'000'000;

/// C(m, s), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t m, std::uint64_t s);

/// Full enumeration. Throws BudgetExceededError when C(m, s) > budget.
double sigma_alpha_min_exact(const DenseMatrix& a, double alpha,
                             std::uint64_t subset_budget = kDefaultSubsetBudget);

/// alpha = 1 - 1/m: min over i of sigma_min(A without row i). Uses one thin
/// QR of A and an n x n SVD per deleted row.
double sigma_alpha_min_leave_one_out(const DenseMatrix& a);

/// Minimum over `trials` uniformly drawn subsets. This is an upper bound on
/// the true value, never a certificate.
double sigma_alpha_min_sampled(const DenseMatrix& a, double alpha, std::size_t trials,
                               std::uint64_t seed);

enum class SpectralMode { kExact, kSampledUpperBound };

struct SpectralEntry {
  double alpha = 0.0;
  double value = 0.0;
  SpectralMode mode = SpectralMode::kExact;
  std::size_t trials = 0;  // sampled mode only
};

struct SpectralProfile {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::vector<SpectralEntry> entries;

  /// Entry for alpha (matched by subset size), if computed.
  std::optional<SpectralEntry> find(double alpha, std::size_t m) const;
};

/// Exact enumeration when within budget, leave-one-out when round(alpha*m)
/// is m - 1, sampled upper bound otherwise.
SpectralProfile spectral_profile(const DenseMatrix& a, std::span<const double> alphas,
                                 std::size_t sampled_trials = 2000, std::uint64_t seed = 0,
                                 std::uint64_t subset_budget = kDefaultSubsetBudget);

// ---------------------------------------------------------------------------
// Convergence bounds. All take spectral values as inputs so that one
// expensive profile can feed several methods.
// ---------------------------------------------------------------------------

struct BoundReport {
  std::string method;
  /// Expected contraction of |x_k - x*|^2 per step.
  double per_step_factor = 1.0;
  /// Factor for the first step (differs when x0 is not on a hyperplane).
  double first_step_factor = 1.0;
  /// The constant C with per_step_factor = 1 - C (qRK / dqRK).
  std::optional<double> contraction;
  std::optional<bool> sufficient_condition_holds;
  std::vector<std::pair<std::string, double>> inputs;

  /// Bound on E|x_k - x*|^2 / |x_0 - x*|^2; envelope(0) = 1.
  double envelope(std::size_t k) const;
};

/// 2 sqrt(beta) / sqrt(1 - q - beta) + beta / (1 - q - beta).
double corruption_penalty(double q, double beta);

/// Plain randomized Kaczmarz: 1 - sigma_min^2 / |A|_F^2.
BoundReport rk_bound(double sigma_min, double frobenius_sq);

/// Reverse-quantile bound for consistent systems,
///   1 - s^2/|A|_F^2 - s_q^2/(q m) * (min_j |a_j|^2 / |A|_F^2) / max_j |a_j|^2,
/// which is 1 - s^2/m - s_q^2/(q m^2) for unit rows. Without a hyperplane
/// start the first step only gets the RK factor. Throws kInvalidQuantiles
/// unless 1/m <= q <= (m-1)/m.
BoundReport rqrk_bound(double sigma_min, double sigma_q_min,
                       std::span<const double> row_sq_norms, double q,
                       bool hyperplane_start = true);

/// Double-quantile bound for row-normalized A with beta-sparse corruption.
/// Throws kHypothesisViolation unless beta < q0 < q1 < 1 - beta and
/// q1 - q0 > beta.
BoundReport dqrk_bound(double sigma_max, double sigma_q1beta_min, double sigma_q0beta_min,
                       double q0, double q1, double beta, std::size_t m);

/// Quantile bound, C = (q - beta) s^2/(q^2 m) - s_max^2/(q m) * penalty.
/// Throws kHypothesisViolation unless beta < q < 1 - beta.
BoundReport qrk_bound(double sigma_max, double sigma_qbeta_min, double q, double beta,
                      std::size_t m);

/// Decay factor for always projecting onto the k-th largest residual,
/// 1 - s_{k/m}^2 / k - s_{(k-1)/m}^2 / (k^2 - k). Needs k >= 2.
double kth_largest_factor(double sigma_km_min, double sigma_k1m_min, std::size_t k);

/// Which multiplier the E diagnostic puts in front of the corruption penalty.
enum class PenaltyForm {
  /// q1 / (q1 - q0 - beta): the dqRK sufficient condition, used by
  /// dqrk_bound. E <= 0 is then exactly "condition fails".
  kTheorem,
  /// q1 / (1 - q0 - beta): the multiplier that reproduces the published
  /// diagnostic table. Smaller than kTheorem, so E <= 0 still implies the
  /// condition fails.
  kTableReproduction,
};

/// (s_loo^2 + s_loo^2/(q0 m)) / s_max^2 - multiplier * penalty(q1, beta), with
/// s_loo = sigma_{1-1/m,min}(A). Negative values certify that the dqRK
/// sufficient condition cannot hold. Throws kHypothesisViolation unless
/// q1 + beta < 1, q1 - q0 > beta and q0 > 0.
double e_diagnostic(double sigma_max, double sigma_loo_min, double q0, double q1, double beta,
                    std::size_t m, PenaltyForm form = PenaltyForm::kTheorem);

// ---------------------------------------------------------------------------
// Exact one-step expectations from the selection law (no sampling).
// ---------------------------------------------------------------------------

/// E|x_next - x*|^2 / |x - x*|^2 for one step of `kind` from x, evaluated by
/// summing over the exact selection distribution.
double expected_one_step_ratio(const DenseSystem& system, const Vector& x,
                               const Vector& x_star, const SelectorKind& kind);

/// E |<(x - x*)/|x - x*|, a_i/|a_i|>|^2 under the selection law of `kind`.
double expected_projection_gain(const DenseSystem& system, const Vector& x,
                                const Vector& x_star, const SelectorKind& kind);

// ---------------------------------------------------------------------------
// Conditioning lemma oracle.
//
// X takes k in [n] with probability p_k; Y is X conditioned on X > ell.
// For non-decreasing f the lemma gives
//   E f(Y) >= E f(X) + (f(ell+1) - f(ell)) * (p_1 + ... + p_ell)
// and the telescoped corollary gives
//   E f(Y) >= E f(X) + sum_{k<=ell} (f(k+1) - f(k)) P(X = k | X >= k).
// ---------------------------------------------------------------------------

struct DiscreteLemmaInstance {
  std::vector<double> p;  // all > 0, sums to 1
  std::vector<double> f;  // non-decreasing
  std::size_t ell = 1;    // 1 <= ell < n

  void validate() const;
};

struct LemmaOracle {
  double ef_y = 0.0;
  double ef_x = 0.0;
  double lemma_lower_bound = 0.0;
  double corollary_lower_bound = 0.0;
};

/// Direct summation. Throws kDegenerateConditioning when the conditioning
/// event has probability below 1e-12.
LemmaOracle lemma1_oracle(const DiscreteLemmaInstance& instance);

}  // namespace kaczmarz
