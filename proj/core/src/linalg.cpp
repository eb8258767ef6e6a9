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

#include "kaczmarz/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kaczmarz/errors.hpp"

namespace kaczmarz {

DenseMatrix::DenseMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "matrix must be at least 1x1");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "matrix has non-finite entries");
  }
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(static_cast<Eigen::Index>(indices.size()), values_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "row index out of range");
    }
    out.row(static_cast<Eigen::Index>(r)) =
        values_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return DenseMatrix(std::move(out));
}

RowView RowView::of(const DenseMatrix& a, std::size_t i) {
  if (i >= a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "row " + std::to_string(i) + " out of range");
  }
  const auto values = a.row(i);
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return {i, values, std::sqrt(sq)};
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has non-finite entries");
  }
}

RowNorms row_norms(const DenseMatrix& a) {
  RowNorms out;
  const Vector sq = a.values().rowwise().squaredNorm();
  out.norms = sq.cwiseSqrt();
  out.frobenius_sq = sq.sum();
  return out;
}

Vector NormalizedRows::rescale(const Vector& b) const {
  if (b.size() != scalings.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "rhs length differs from row count");
  }
  return b.cwiseQuotient(scalings);
}

NormalizedRows normalize_rows(const DenseMatrix& a) {
  Matrix values = a.values();
  Vector scalings(values.rows());
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const double norm = values.row(i).norm();
    if (norm < kZeroRowTolerance) throw ZeroRowError(static_cast<std::size_t>(i));
    scalings(i) = norm;
    values.row(i) /= norm;
  }
  return {DenseMatrix(std::move(values)), std::move(scalings)};
}

Vector normalized_residuals(const DenseMatrix& a, const Vector& b, const Vector& x) {
  if (static_cast<std::size_t>(b.size()) != a.rows() ||
      static_cast<std::size_t>(x.size()) != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "normalized_residuals: A is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ", b has " + std::to_string(b.size()) +
                    ", x has " + std::to_string(x.size()));
  }
  const Vector norms = a.values().rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms(i) < kZeroRowTolerance) throw ZeroRowError(static_cast<std::size_t>(i));
  }
  return (a.values() * x - b).cwiseAbs().cwiseQuotient(norms);
}

Vector project_onto_row(const Vector& x, const RowView& row, double rhs) {
  if (static_cast<std::size_t>(x.size()) != row.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "iterate and row lengths differ");
  }
  if (row.norm < kZeroRowTolerance) throw ZeroRowError(row.index);
  const Eigen::Map<const Vector> a(row.values.data(), static_cast<Eigen::Index>(row.values.size()));
  const double coeff = (rhs - a.dot(x)) / (row.norm * row.norm);
  return x + coeff * a;
}

SingularValueRange extreme_singular_values(const DenseMatrix& a, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  if (tol < 8.0 * std::numeric_limits<double>::epsilon()) {
    throw ConvergenceError("requested relative tolerance " + std::to_string(tol) +
                           " is below double-precision resolution");
  }
  Eigen::BDCSVD<Matrix> svd(a.values());
  if (svd.info() != Eigen::Success) {
    throw ConvergenceError("SVD did not converge");
  }
  const Vector& s = svd.singularValues();
  SingularValueRange out;
  out.max = s(0);
  // Fewer rows than columns means a nontrivial null space.
  out.min = a.rows() < a.cols() ? 0.0 : s(s.size() - 1);
  return out;
}

double smallest_singular_value(const Eigen::Ref<const Matrix>& block) {
  if (block.rows() < block.cols()) return 0.0;
  if (block.cols() <= 16) {
    Eigen::JacobiSVD<Matrix> svd(block);
    return svd.singularValues()(block.cols() - 1);
  }
  Eigen::BDCSVD<Matrix> svd(block);
  if (svd.info() != Eigen::Success) throw ConvergenceError("SVD did not converge");
  return svd.singularValues()(block.cols() - 1);
}

}  // namespace kaczmarz
