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

#include <gtest/gtest.h>

#include <cmath>

#include "kaczmarz/analysis.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/problems.hpp"
#include "oracles.hpp"

namespace kaczmarz {
namespace {

Matrix gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  }
  return a;
}

// Rows (1,0), (0,1), (1,1): any two-row block has sigma_min 1 or the golden
// ratio conjugate.
Matrix golden() {
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  return a;
}

constexpr double kGoldenConjugate = 0.6180339887498949;

TEST(Binomial, SmallValuesAndSaturation) {
  EXPECT_EQ(binomial(20, 10), 184756u);
  EXPECT_EQ(binomial(5, 0), 1u);
  EXPECT_EQ(binomial(5, 7), 0u);
  EXPECT_EQ(binomial(1000, 500), UINT64_MAX);
}

TEST(SigmaAlphaExact, KnownMatrices) {
  // Two rows of I3 leave a null direction, so the subset-size convention
  // gives 0 even though the 2x3 block's nonzero singular values are 1.
  EXPECT_EQ(sigma_alpha_min_exact(DenseMatrix(Matrix::Identity(3, 3)), 2.0 / 3.0), 0.0);
  const Matrix stacked = (Matrix(6, 3) << Matrix::Identity(3, 3), Matrix::Identity(3, 3)).finished();
  EXPECT_NEAR(sigma_alpha_min_exact(DenseMatrix(stacked), 4.0 / 6.0), 0.0, 1e-14);
  EXPECT_NEAR(sigma_alpha_min_exact(DenseMatrix(stacked), 5.0 / 6.0), 1.0, 1e-12);
  EXPECT_NEAR(sigma_alpha_min_exact(DenseMatrix(golden()), 2.0 / 3.0), kGoldenConjugate, 1e-12);
  EXPECT_EQ(sigma_alpha_min_exact(DenseMatrix(gaussian(6, 3, 1)), 1.0 / 3.0), 0.0);
}

TEST(SigmaAlphaExact, FullSetIsSigmaMin) {
  EXPECT_NEAR(sigma_alpha_min_exact(DenseMatrix(Matrix::Identity(3, 3)), 1.0), 1.0, 1e-14);
  const Matrix a = gaussian(9, 3, 77);
  EXPECT_NEAR(sigma_alpha_min_exact(DenseMatrix(a), 1.0), oracle::gram_sigma_min(a), 1e-10);
}

TEST(SigmaAlphaExact, SixByTwoMatchesEnumerationOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix a = gaussian(6, 2, seed);
    EXPECT_NEAR(sigma_alpha_min_exact(DenseMatrix(a), 0.5), oracle::brute_sigma_min_subsets(a, 3),
                1e-10);
  }
}

// Property: exact mode agrees with the bitmask oracle on every matrix shape
// up to 8x3 and every feasible subset size.
TEST(SigmaAlphaExact, AgreesWithOracleOnAllSmallShapes) {
  std::uint64_t seed = 100;
  for (std::size_t m = 1; m <= 8; ++m) {
    for (std::size_t n = 1; n <= 3; ++n) {
      const Matrix a = gaussian(m, n, ++seed);
      for (std::size_t s = 1; s <= m; ++s) {
        const double alpha = static_cast<double>(s) / static_cast<double>(m);
        const double got = sigma_alpha_min_exact(DenseMatrix(a), alpha);
        const double want = oracle::brute_sigma_min_subsets(a, s);
        ASSERT_NEAR(got, want, 1e-9 * (1.0 + want)) << m << "x" << n << " s=" << s;
      }
    }
  }
}

TEST(SigmaAlphaExact, BudgetIsEnforced) {
  try {
    sigma_alpha_min_exact(DenseMatrix(gaussian(30, 2, 1)), 0.5, 1000);
    FAIL();
  } catch (const BudgetExceededError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
    EXPECT_EQ(e.subsets(), binomial(30, 15));
  }
}

TEST(SigmaLeaveOneOut, MatchesExactAndKnownValues) {
  EXPECT_NEAR(sigma_alpha_min_leave_one_out(DenseMatrix(golden())), kGoldenConjugate, 1e-12);
  EXPECT_NEAR(sigma_alpha_min_leave_one_out(DenseMatrix(Matrix::Identity(3, 3))), 0.0, 1e-12);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Matrix a = gaussian(12, 4, seed);
    EXPECT_NEAR(sigma_alpha_min_leave_one_out(DenseMatrix(a)),
                oracle::brute_sigma_min_subsets(a, 11), 1e-10);
  }
  const Matrix big = gaussian(60, 20, 9);
  EXPECT_NEAR(sigma_alpha_min_leave_one_out(DenseMatrix(big)),
              sigma_alpha_min_exact(DenseMatrix(big), 59.0 / 60.0), 1e-10);
}

TEST(SigmaSampled, UpperBoundsExactAndIsDeterministic) {
  const Matrix a = gaussian(6, 2, 3);
  const double exact = sigma_alpha_min_exact(DenseMatrix(a), 0.5);
  // 400 draws of 20 subsets cover all of them with overwhelming probability.
  EXPECT_NEAR(sigma_alpha_min_sampled(DenseMatrix(a), 0.5, 400, 1), exact, 1e-12);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix b = gaussian(10, 3, seed);
    const double ex = sigma_alpha_min_exact(DenseMatrix(b), 0.6);
    const double sm = sigma_alpha_min_sampled(DenseMatrix(b), 0.6, 20, seed);
    EXPECT_GE(sm, ex - 1e-12);
    EXPECT_EQ(sm, sigma_alpha_min_sampled(DenseMatrix(b), 0.6, 20, seed));
  }
}

TEST(SpectralProfile, ChoosesModes) {
  const Matrix a = gaussian(20, 3, 5);
  const std::vector<double> alphas = {0.5, 19.0 / 20.0};
  const auto prof = spectral_profile(DenseMatrix(a), alphas, 50, 1, 1000);
  ASSERT_EQ(prof.entries.size(), 2u);
  EXPECT_EQ(prof.find(0.5, 20)->mode, SpectralMode::kSampledUpperBound);
  EXPECT_EQ(prof.find(0.95, 20)->mode, SpectralMode::kExact);
  EXPECT_NEAR(prof.find(0.95, 20)->value, sigma_alpha_min_leave_one_out(DenseMatrix(a)), 1e-12);
  EXPECT_FALSE(prof.find(0.7, 20));
  const auto ref = oracle::gram_singular_values(a);
  EXPECT_NEAR(prof.sigma_min, ref.front(), 1e-9);
  EXPECT_NEAR(prof.sigma_max, ref.back(), 1e-9);
}

TEST(Bounds, CorruptionPenaltyFrozenValue) {
  EXPECT_NEAR(corruption_penalty(0.8, 0.05), 1.4880338717125852, 1e-14);
  EXPECT_EQ(corruption_penalty(0.5, 0.0), 0.0);
  EXPECT_THROW(corruption_penalty(0.9, 0.1), Error);
}

TEST(Bounds, ReverseQuantileLimitsAndPlugIns) {
  const std::vector<double> unit(10, 1.0);
  EXPECT_NEAR(rqrk_bound(1.0, 0.0, unit, 0.5).per_step_factor, 0.9, 1e-15);
  const std::vector<double> unit20(20, 1.0);
  EXPECT_NEAR(rqrk_bound(0.5, 0.7, unit20, 0.5).per_step_factor, 0.98505, 1e-14);
  EXPECT_NEAR(rqrk_bound(0.5, 0.7, unit20, 0.5, false).first_step_factor, 1.0 - 0.25 / 20, 1e-15);

  // sigma_q = 0 degrades to the RK factor, also for unequal rows.
  const std::vector<double> w = {1.0, 2.0, 4.0, 0.5};
  EXPECT_NEAR(rqrk_bound(0.8, 0.0, w, 0.5).per_step_factor,
              rk_bound(0.8, 7.5).per_step_factor, 1e-15);
  const double general = rqrk_bound(0.8, 0.6, w, 0.5).per_step_factor;
  EXPECT_NEAR(general, 1.0 - 0.64 / 7.5 - 0.36 / (0.5 * 4) * (0.5 / 7.5) / 4.0, 1e-15);

  // q = (m-1)/m matches the top-residual factor at k = m.
  const std::size_t m = 12;
  const std::vector<double> unit12(m, 1.0);
  const double s = 0.7;
  const double s_loo = 0.55;
  const double a2 = 1.0 - s * s / 12.0 - s_loo * s_loo / (144.0 - 12.0);
  EXPECT_NEAR(rqrk_bound(s, s_loo, unit12, 11.0 / 12.0).per_step_factor, a2, 1e-15);
  EXPECT_NEAR(kth_largest_factor(s, s_loo, m), a2, 1e-15);

  EXPECT_THROW(rqrk_bound(1.0, 0.0, unit, 0.05), Error);
  EXPECT_THROW(rqrk_bound(1.0, 0.0, unit, 0.95), Error);
}

TEST(Bounds, EnvelopeComposesFactors) {
  const std::vector<double> unit(10, 1.0);
  const auto r = rqrk_bound(1.0, 0.5, unit, 0.5, false);
  EXPECT_EQ(r.envelope(0), 1.0);
  EXPECT_NEAR(r.envelope(1), 0.9, 1e-15);
  EXPECT_NEAR(r.envelope(3), 0.9 * std::pow(r.per_step_factor, 2), 1e-15);
}

TEST(Bounds, KthLargest) {
  EXPECT_EQ(kth_largest_factor(0.0, 0.0, 5), 1.0);
  EXPECT_NEAR(kth_largest_factor(1.0, 1.0, 2), 0.0, 1e-15);
  EXPECT_NEAR(kth_largest_factor(0.6, 0.4, 5), 0.92, 1e-15);
  EXPECT_THROW(kth_largest_factor(1.0, 1.0, 1), Error);
}

TEST(Bounds, DoubleQuantileFrozenValueAndHypotheses) {
  const auto r = dqrk_bound(2.0, 0.9, 0.5, 0.4, 0.6, 0.01, 200);
  EXPECT_NEAR(*r.contraction, -0.028152493741786664, 1e-14);
  EXPECT_FALSE(*r.sufficient_condition_holds);
  EXPECT_THROW(dqrk_bound(2.0, 0.9, 0.5, 0.4, 0.45, 0.05, 200), Error);
  EXPECT_THROW(dqrk_bound(2.0, 0.9, 0.5, 0.04, 0.6, 0.05, 200), Error);
  EXPECT_THROW(dqrk_bound(2.0, 0.9, 0.5, 0.4, 0.96, 0.05, 200), Error);
}

// Property: over many inputs the verdict equals the sign of C.
TEST(Bounds, DoubleQuantileConditionIsSignOfContraction) {
  Rng rng(8);
  for (int t = 0; t < 2000; ++t) {
    const double beta = 0.1 * rng.uniform();
    const double q0 = beta + 0.01 + 0.3 * rng.uniform();
    const double q1 = q0 + beta + 0.01 + (1.0 - beta - q0 - beta - 0.02) * rng.uniform();
    if (!(q1 < 1.0 - beta)) continue;
    const double smax = 1.0 + 3.0 * rng.uniform();
    const double s1 = smax * rng.uniform();
    const double s0 = s1 * rng.uniform();
    const auto r = dqrk_bound(smax, s1, s0, q0, q1, beta, 100);
    if (std::abs(*r.contraction) < 1e-12) continue;
    ASSERT_EQ(*r.sufficient_condition_holds, *r.contraction > 0.0);
  }
}

TEST(Bounds, DoubleQuantileVerdictOnGaussianSystem) {
  ProblemSpec spec;
  spec.source = GeneratedSource{Distribution::kGaussian, 200, 10, 1};
  const auto sys = generate_system(spec);
  const double q0 = 0.4, q1 = 0.6, beta = 0.01;
  const double smax = extreme_singular_values(sys.a).max;
  const double s1 = sigma_alpha_min_sampled(sys.a, q1 - beta, 100, 2);
  const double s0 = sigma_alpha_min_sampled(sys.a, q0 - beta, 100, 3);
  const auto r = dqrk_bound(smax, s1, s0, q0, q1, beta, 200);
  const double penalty = 2.0 * std::sqrt(beta) / std::sqrt(1.0 - q1 - beta) + beta / (1.0 - q1 - beta);
  const bool independent =
      q1 / (q1 - q0 - beta) * penalty < (s1 * s1 + s0 * s0 / (q0 * 200.0)) / (smax * smax);
  EXPECT_EQ(*r.sufficient_condition_holds, independent);
}

TEST(Bounds, QuantileFrozenValuesAndLimits) {
  EXPECT_NEAR(*qrk_bound(2.0, 0.9, 0.8, 0.05, 100).contraction, -0.06490950608562926, 1e-14);
  const auto clean = qrk_bound(1.2, 0.9, 0.8, 0.0, 100);
  EXPECT_NEAR(*clean.contraction, 0.81 / 80.0, 1e-15);
  EXPECT_TRUE(*clean.sufficient_condition_holds);
  EXPECT_FALSE(*qrk_bound(1.2, 0.0, 0.8, 0.0, 100).sufficient_condition_holds);
  EXPECT_THROW(qrk_bound(1.0, 1.0, 0.04, 0.05, 100), Error);
  EXPECT_THROW(qrk_bound(1.0, 1.0, 0.96, 0.05, 100), Error);
}

TEST(Bounds, DoubleQuantileReducesToQuantileAsLowerQuantileVanishes) {
  const double smax = 1.7, s1 = 0.8, q1 = 0.7;
  const std::size_t m = 150;
  const auto d = dqrk_bound(smax, s1, 0.0, 1e-9, q1, 0.0, m);
  const auto q = qrk_bound(smax, s1, q1, 0.0, m);
  EXPECT_NEAR(*d.contraction, *q.contraction, 1e-12);
}

TEST(EDiagnostic, FrozenValuesForBothForms) {
  EXPECT_NEAR(e_diagnostic(3.0, 0.7392, 0.6, 0.8, 0.05, 958, PenaltyForm::kTableReproduction),
              -3.3404016937047176, 1e-12);
  EXPECT_NEAR(e_diagnostic(3.0, 0.7392, 0.6, 0.8, 0.05, 958, PenaltyForm::kTheorem),
              -7.875362064638308, 1e-12);
  // Rank-deficient leave-one-out: only the penalty remains (the table's
  // -3.4012 rows).
  EXPECT_NEAR(e_diagnostic(5.0, 0.0, 0.6, 0.8, 0.05, 1000, PenaltyForm::kTableReproduction),
              -0.8 / 0.35 * 1.4880338717125852, 1e-12);
  EXPECT_NEAR(e_diagnostic(5.0, 0.0, 0.6, 0.8, 0.05, 1000, PenaltyForm::kTheorem),
              -0.8 / 0.15 * 1.4880338717125852, 1e-12);
  EXPECT_LT(e_diagnostic(5.0, 0.0, 0.6, 0.8, 0.05, 1000), 0.0);
  EXPECT_THROW(e_diagnostic(1.0, 1.0, 0.6, 0.64, 0.05, 10), Error);
}

// Property: with the diagnostic's inputs as surrogates (sigma_{q-beta} is at
// most sigma_loo), E <= 0 in either form implies the dqRK condition fails, and
// kTheorem's sign is exactly the condition evaluated at the surrogates.
TEST(EDiagnostic, NonPositiveValueImpliesConditionFails) {
  Rng rng(21);
  const double q0 = 0.6, q1 = 0.8, beta = 0.05;
  for (int t = 0; t < 2000; ++t) {
    const std::size_t m = 50 + rng.uniform_index(1000);
    const double smax = 1.0 + 5.0 * rng.uniform();
    const double sloo = smax * rng.uniform();
    const double s1 = sloo * rng.uniform();
    const double s0 = s1 * rng.uniform();
    const auto surrogate = dqrk_bound(smax, sloo, sloo, q0, q1, beta, m);
    const auto actual = dqrk_bound(smax, s1, s0, q0, q1, beta, m);
    for (auto form : {PenaltyForm::kTheorem, PenaltyForm::kTableReproduction}) {
      if (e_diagnostic(smax, sloo, q0, q1, beta, m, form) <= 0.0) {
        ASSERT_FALSE(*surrogate.sufficient_condition_holds);
        ASSERT_FALSE(*actual.sufficient_condition_holds);
      }
    }
    const double e = e_diagnostic(smax, sloo, q0, q1, beta, m, PenaltyForm::kTheorem);
    if (std::abs(e) > 1e-12) ASSERT_EQ(e > 0.0, *surrogate.sufficient_condition_holds);
  }
}

TEST(ExpectedRatio, DirectSummationMatchesOracleAndMonteCarlo) {
  ProblemSpec spec;
  spec.source = GeneratedSource{Distribution::kGaussian, 15, 3, 4};
  const auto sys = generate_system(spec);
  const Vector x = Vector::Zero(3);
  const Vector& xs = sys.truth->x_star;
  // Oracle: uniform over the top m - round(q m) residuals, by sorting.
  const Vector r = normalized_residuals(sys.a, sys.b, x);
  const std::vector<double> rv(r.data(), r.data() + r.size());
  const auto p = oracle::block_law(rv, std::vector<double>(15, 1.0), oracle::round_rank(0.5, 15), 15);
  double want = 0.0;
  for (std::size_t i = 0; i < 15; ++i) {
    if (p[i] == 0.0) continue;
    const Vector xn = project_onto_row(x, RowView::of(sys.a, i), sys.b(static_cast<Eigen::Index>(i)));
    want += p[i] * (xn - xs).squaredNorm();
  }
  want /= xs.squaredNorm();
  EXPECT_NEAR(expected_one_step_ratio(sys, x, xs, Rqrk{0.5}), want, 1e-13);

  Rng rng(5);
  double mc = 0.0;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) mc += (step(sys, x, Rqrk{0.5}, rng).x_next - xs).squaredNorm();
  EXPECT_NEAR(mc / draws / xs.squaredNorm(), want, 0.01);

  // For unit rows, ratio = 1 - gain.
  EXPECT_NEAR(expected_one_step_ratio(sys, x, xs, Dqrk{0.2, 0.9}),
              1.0 - expected_projection_gain(sys, x, xs, Dqrk{0.2, 0.9}), 1e-13);
  EXPECT_THROW(expected_one_step_ratio(sys, xs, xs, Rk{}), Error);
}

TEST(LemmaOracle, HandExampleAndConstantFunction) {
  const auto o = lemma1_oracle({{1.0 / 3, 1.0 / 3, 1.0 / 3}, {0, 1, 2}, 1});
  EXPECT_NEAR(o.ef_x, 1.0, 1e-15);
  EXPECT_NEAR(o.ef_y, 1.5, 1e-15);
  EXPECT_NEAR(o.lemma_lower_bound, 4.0 / 3.0, 1e-15);
  const auto c = lemma1_oracle({{0.2, 0.3, 0.5}, {2, 2, 2}, 2});
  EXPECT_NEAR(c.ef_x, 2.0, 1e-15);
  EXPECT_NEAR(c.ef_y, 2.0, 1e-15);
  EXPECT_NEAR(c.lemma_lower_bound, 2.0, 1e-15);
  EXPECT_NEAR(c.corollary_lower_bound, 2.0, 1e-15);
}

TEST(LemmaOracle, CorollaryCanFallBelowLemmaBound) {
  // Counterexample to ordering the corollary above the lemma: the step of f
  // sits at ell, where the lemma charges the whole head mass.
  const auto o = lemma1_oracle({{0.45, 0.1, 0.45}, {0, 0, 1}, 2});
  EXPECT_NEAR(o.lemma_lower_bound, 1.0, 1e-15);
  EXPECT_NEAR(o.corollary_lower_bound, 0.45 + 0.1 / 0.55, 1e-15);
  EXPECT_LT(o.corollary_lower_bound, o.lemma_lower_bound);
  EXPECT_GE(o.ef_y, o.lemma_lower_bound - 1e-15);
}

// Property: the chain links that do hold. E f(Y) dominates both bounds and
// both bounds dominate E f(X), strictly for non-constant f.
TEST(LemmaOracle, RandomInstancesRespectProvenLinks) {
  Rng rng(7);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + rng.uniform_index(9);
    DiscreteLemmaInstance inst;
    inst.p.resize(n);
    double total = 0.0;
    for (auto& pk : inst.p) total += (pk = 0.05 + rng.uniform());
    for (auto& pk : inst.p) pk /= total;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) inst.f.push_back(s += (rng.uniform() < 0.3 ? 0.0 : rng.uniform()));
    inst.ell = 1 + rng.uniform_index(n - 1);
    const auto o = lemma1_oracle(inst);
    const double tol = 1e-12;
    ASSERT_GE(o.ef_y, o.lemma_lower_bound - tol);
    ASSERT_GE(o.ef_y, o.corollary_lower_bound - tol);
    ASSERT_GE(o.lemma_lower_bound, o.ef_x - tol);
    ASSERT_GE(o.corollary_lower_bound, o.ef_x - tol);
    if (inst.f.back() > inst.f.front()) ASSERT_GT(o.ef_y, o.ef_x);
  }
}

TEST(LemmaOracle, RejectsInvalidInstances) {
  EXPECT_THROW(lemma1_oracle({{0.5, 0.5}, {1, 0}, 1}), Error);
  EXPECT_THROW(lemma1_oracle({{0.5, 0.6}, {0, 1}, 1}), Error);
  EXPECT_THROW(lemma1_oracle({{0.5, 0.5}, {0, 1}, 2}), Error);
  EXPECT_THROW(lemma1_oracle({{0.5, 0.5}, {0, 1, 2}, 1}), Error);
  try {
    lemma1_oracle({{1.0 - 1e-14, 1e-14}, {0, 1}, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateConditioning);
  }
}

}  // namespace
}  // namespace kaczmarz
