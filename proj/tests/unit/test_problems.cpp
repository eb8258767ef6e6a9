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

#include "kaczmarz/errors.hpp"
#include "kaczmarz/problems.hpp"

namespace kaczmarz {
namespace {

ProblemSpec gaussian(std::size_t m, std::size_t n, double beta = 0.0, double scale = 1.0) {
  ProblemSpec spec;
  spec.source = GeneratedSource{Distribution::kGaussian, m, n, 3};
  spec.solution_seed = 4;
  if (beta > 0.0) spec.corruption = CorruptionSpec{beta, 0.0, 1.0, scale, 5};
  return spec;
}

TEST(GenerateSystem, ConsistentWithoutCorruption) {
  const auto sys = generate_system(gaussian(100, 10));
  ASSERT_TRUE(sys.truth);
  EXPECT_LT(normalized_residuals(sys.a, sys.b, sys.truth->x_star).maxCoeff(), 1e-10);
  EXPECT_TRUE(sys.truth->corrupt_support.empty());
  const auto norms = row_norms(sys.a).norms;
  for (Eigen::Index i = 0; i < norms.size(); ++i) EXPECT_NEAR(norms(i), 1.0, 1e-12);
}

TEST(GenerateSystem, CorruptionSupportIsExact) {
  const auto sys = generate_system(gaussian(100, 10, 0.05));
  const auto& t = *sys.truth;
  ASSERT_EQ(t.corrupt_support.size(), 5u);
  const Vector diff = sys.b - t.b_true;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const bool in = std::binary_search(t.corrupt_support.begin(), t.corrupt_support.end(), i);
    if (in) {
      EXPECT_GT(diff(static_cast<Eigen::Index>(i)), 0.0);
      ++nonzero;
    } else {
      EXPECT_EQ(diff(static_cast<Eigen::Index>(i)), 0.0);
    }
  }
  EXPECT_EQ(nonzero, 5u);
}

TEST(GenerateSystem, ScaledMagnitudesStayInRange) {
  const auto sys = generate_system(gaussian(400, 10, 0.05, 100.0));
  const Vector diff = sys.b - sys.truth->b_true;
  for (auto i : sys.truth->corrupt_support) {
    EXPECT_GT(diff(static_cast<Eigen::Index>(i)), 0.0);
    EXPECT_LE(diff(static_cast<Eigen::Index>(i)), 100.0);
  }
}

TEST(GenerateSystem, DeterministicInSeeds) {
  const auto a = generate_system(gaussian(50, 5, 0.1));
  const auto b = generate_system(gaussian(50, 5, 0.1));
  EXPECT_EQ(a.a.values(), b.a.values());
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.truth->corrupt_support, b.truth->corrupt_support);
  auto other = gaussian(50, 5, 0.1);
  std::get<GeneratedSource>(other.source).seed = 99;
  EXPECT_NE(generate_system(other).a.values(), a.a.values());
}

TEST(GenerateSystem, UniformEntriesAndRejectsBadShapes) {
  ProblemSpec spec;
  spec.source = GeneratedSource{Distribution::kUniform, 30, 3, 1};
  spec.normalize = false;
  const auto sys = generate_system(spec);
  EXPECT_GE(sys.a.values().minCoeff(), 0.0);
  EXPECT_LT(sys.a.values().maxCoeff(), 1.0);
  spec.source = GeneratedSource{Distribution::kUniform, 3, 3, 1};
  EXPECT_THROW(generate_system(spec), Error);
}

TEST(GenerateSystem, FileSourceWithPerturbation) {
  ProblemSpec spec;
  spec.source = FileSource{KACZMARZ_TEST_DATA "/array_3x2.mtx", 0.0, 0};
  spec.normalize = false;
  const auto plain = generate_system(spec);
  EXPECT_EQ(plain.a(2, 1), 6.0);
  spec.source = FileSource{KACZMARZ_TEST_DATA "/array_3x2.mtx", 0.01, 7};
  const auto noisy = generate_system(spec);
  EXPECT_NE(noisy.a(2, 1), 6.0);
  EXPECT_NEAR(noisy.a(2, 1), 6.0, 0.1);
}

TEST(Corrupt, EdgeCases) {
  const Vector b = Vector::Ones(20);
  const auto none = corrupt(b, CorruptionSpec{0.0, 0.0, 1.0, 1.0, 1});
  EXPECT_EQ(none.b, b);
  EXPECT_TRUE(none.support.empty());
  const auto one = corrupt(b, CorruptionSpec{1.0 / 20.0, 0.0, 1.0, 1.0, 1});
  EXPECT_EQ(one.support.size(), 1u);
  const auto again = corrupt(b, CorruptionSpec{0.3, 0.0, 1.0, 1.0, 8});
  const auto twice = corrupt(b, CorruptionSpec{0.3, 0.0, 1.0, 1.0, 8});
  EXPECT_EQ(again.b, twice.b);
  EXPECT_EQ(again.support, twice.support);
  EXPECT_TRUE(std::is_sorted(again.support.begin(), again.support.end()));
  EXPECT_THROW(corrupt(b, CorruptionSpec{1.0, 0.0, 1.0, 1.0, 1}), Error);
  EXPECT_THROW(corrupt(b, CorruptionSpec{-0.1, 0.0, 1.0, 1.0, 1}), Error);
  EXPECT_THROW(corrupt(b, CorruptionSpec{0.1, 2.0, 1.0, 1.0, 1}), Error);
}

TEST(InitialIterate, HyperplanePoint) {
  Matrix v(3, 2);
  v << 1, 0, 3, 4, 0, 1;
  const DenseMatrix a(v);
  Vector b(3);
  b << 2, 5, 0;
  const Vector x = initial_iterate_on_hyperplane(a, b, 0);
  EXPECT_DOUBLE_EQ(x(0), 2.0);
  EXPECT_DOUBLE_EQ(x(1), 0.0);
  const Vector y = initial_iterate_on_hyperplane(a, b, 1);
  EXPECT_NEAR(y(0), 0.6, 1e-15);
  EXPECT_NEAR(y(1), 0.8, 1e-15);
  EXPECT_TRUE(initial_iterate_on_hyperplane(a, b, 2).isZero());
}

TEST(DenseSystemValidate, CatchesInconsistentMetadata) {
  auto sys = generate_system(gaussian(40, 4, 0.05));
  EXPECT_NO_THROW(sys.validate());
  std::size_t clean = 0;
  while (std::binary_search(sys.truth->corrupt_support.begin(), sys.truth->corrupt_support.end(),
                            clean)) {
    ++clean;
  }
  auto bad = sys;
  bad.b(static_cast<Eigen::Index>(clean)) += 1.0;
  EXPECT_THROW(bad.validate(), Error);
  auto wrong = sys;
  wrong.b = Vector::Zero(3);
  EXPECT_THROW(wrong.validate(), Error);
}

}  // namespace
}  // namespace kaczmarz
