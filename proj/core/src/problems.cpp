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

#include "kaczmarz/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/matrix_market.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {

Corruption corrupt(const Vector& b_true, const CorruptionSpec& spec) {
  if (!(spec.beta >= 0.0 && spec.beta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must lie in [0, 1)");
  }
  if (!(spec.magnitude_low <= spec.magnitude_high)) {
    throw Error(ErrorCode::kInvalidArgument, "magnitude_low exceeds magnitude_high");
  }
  if (!std::isfinite(spec.scale) || spec.scale == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "corruption scale must be finite and nonzero");
  }
  const std::size_t m = static_cast<std::size_t>(b_true.size());
  const auto count = static_cast<std::size_t>(std::floor(spec.beta * static_cast<double>(m) + 0.5));
  if (count > m) throw Error(ErrorCode::kInvalidArgument, "round(beta*m) exceeds m");

  Rng rng(spec.seed);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(m - i)]);
  }
  Corruption out{b_true, {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)}};
  std::sort(out.support.begin(), out.support.end());

  const double width = spec.magnitude_high - spec.magnitude_low;
  for (std::size_t i : out.support) {
    double e = 0.0;
    // (0, 1] draws keep U(0, 1) magnitudes strictly positive; redraw the
    // measure-zero case where a signed range lands on exactly zero.
    do {
      e = (spec.magnitude_low + width * rng.uniform_open_closed()) * spec.scale;
    } while (e == 0.0);
    out.b(static_cast<Eigen::Index>(i)) += e;
  }
  return out;
}

DenseMatrix random_matrix(Distribution distribution, std::size_t m, std::size_t n,
                          std::uint64_t seed) {
  Rng rng(seed);
  Matrix values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      values(i, j) = distribution == Distribution::kGaussian ? rng.normal() : rng.uniform();
    }
  }
  return DenseMatrix(std::move(values));
}

namespace {

DenseMatrix load_source(const ProblemSpec& spec) {
  if (const auto* g = std::get_if<GeneratedSource>(&spec.source)) {
    if (g->m == 0 || g->n == 0) throw Error(ErrorCode::kInvalidArgument, "m and n must be positive");
    if (g->m <= g->n) {
      throw Error(ErrorCode::kInvalidArgument, "generated systems must be over-determined (m > n)");
    }
    return random_matrix(g->distribution, g->m, g->n, g->seed);
  }
  const auto& f = std::get<FileSource>(spec.source);
  DenseMatrix a = load_matrix_market(f.path);
  if (f.gaussian_scale == 0.0) return a;
  Rng rng(f.perturbation_seed);
  Matrix values = a.values();
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) values(i, j) += f.gaussian_scale * rng.normal();
  }
  return DenseMatrix(std::move(values));
}

}  // namespace

DenseSystem generate_system(const ProblemSpec& spec) {
  DenseMatrix a = load_source(spec);
  if (spec.normalize) a = normalize_rows(a).matrix;

  Rng rng(spec.solution_seed);
  Vector x_star(static_cast<Eigen::Index>(a.cols()));
  for (Eigen::Index j = 0; j < x_star.size(); ++j) x_star(j) = rng.normal();
  Vector b_true = a.values() * x_star;

  GroundTruth truth{x_star, b_true, {}, 0.0};
  Vector b = b_true;
  if (spec.corruption) {
    Corruption c = corrupt(b_true, *spec.corruption);
    b = std::move(c.b);
    truth.corrupt_support = std::move(c.support);
    truth.beta = spec.corruption->beta;
  }
  DenseSystem system{std::move(a), std::move(b), std::move(truth)};
  system.validate();
  return system;
}

Vector initial_iterate_on_hyperplane(const DenseMatrix& a, const Vector& b, std::size_t i) {
  if (static_cast<std::size_t>(b.size()) != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "b length differs from row count");
  }
  const RowView row = RowView::of(a, i);
  if (row.norm < kZeroRowTolerance) throw ZeroRowError(i);
  const Eigen::Map<const Vector> values(row.values.data(),
                                        static_cast<Eigen::Index>(row.values.size()));
  return (b(static_cast<Eigen::Index>(i)) / (row.norm * row.norm)) * values;
}

}  // namespace kaczmarz
