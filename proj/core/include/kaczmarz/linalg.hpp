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

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace kaczmarz {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Rows with Euclidean norm below this are treated as zero.
inline constexpr double kZeroRowTolerance = 1e-14;

/// Immutable, validated dense matrix in row-major order: at least one row
/// and one column, all entries finite.
class DenseMatrix {
 public:
  /// Throws kInvalidArgument when the invariants do not hold.
  explicit DenseMatrix(Matrix values);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  const Matrix& values() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols(), cols()};
  }

  DenseMatrix transpose() const { return DenseMatrix(values_.transpose()); }
  /// Rows listed in `indices`, in that order.
  DenseMatrix select_rows(std::span<const std::size_t> indices) const;

 private:
  Matrix values_;
};

/// One row with its cached Euclidean norm.
struct RowView {
  std::size_t index;
  std::span<const double> values;
  double norm;

  static RowView of(const DenseMatrix& a, std::size_t i);
};

/// Throws kInvalidArgument if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what);

struct RowNorms {
  Vector norms;
  double frobenius_sq = 0.0;
};

RowNorms row_norms(const DenseMatrix& a);

struct NormalizedRows {
  DenseMatrix matrix;
  /// Original norm of each row; b_i is rescaled as b_i / scalings_i.
  Vector scalings;

  Vector rescale(const Vector& b) const;
};

/// Throws ZeroRowError for a row with norm below kZeroRowTolerance.
NormalizedRows normalize_rows(const DenseMatrix& a);

/// Entry j is |<x, a_j> - b_j| / |a_j|, the distance from x to hyperplane j.
Vector normalized_residuals(const DenseMatrix& a, const Vector& b, const Vector& x);

/// Projection of x onto {y : <y, a_i> = b_i}.
Vector project_onto_row(const Vector& x, const RowView& row, double rhs);

struct SingularValueRange {
  double min = 0.0;
  double max = 0.0;
};

/// Smallest and largest singular values of `a`. Computed by a dense
/// bidiagonal divide-and-conquer SVD; throws ConvergenceError when the SVD
/// reports non-convergence or `tol` is below what double precision can give.
SingularValueRange extreme_singular_values(const DenseMatrix& a, double tol = 1e-10);

/// sigma_min of an arbitrary block; 0 when it has fewer rows than columns.
double smallest_singular_value(const Eigen::Ref<const Matrix>& block);

}  // namespace kaczmarz
