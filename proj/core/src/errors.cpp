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

#include "kaczmarz/errors.hpp"

namespace kaczmarz {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroRow: return "ZeroRow";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidQuantiles: return "InvalidQuantiles";
    case ErrorCode::kEmptyAdmissibleSet: return "EmptyAdmissibleSet";
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnsupportedField: return "UnsupportedField";
    case ErrorCode::kFileError: return "FileError";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kHypothesisViolation: return "HypothesisViolation";
    case ErrorCode::kDegenerateConditioning: return "DegenerateConditioning";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

ZeroRowError::ZeroRowError(std::size_t row)
    : Error(ErrorCode::kZeroRow,
            "row " + std::to_string(row) + " has norm below 1e-14"),
      row_(row) {}

ParseError::ParseError(std::size_t line, const std::string& reason)
    : Error(ErrorCode::kParseError,
            "line " + std::to_string(line) + ": " + reason),
      line_(line) {}

BudgetExceededError::BudgetExceededError(std::uint64_t subsets,
                                         std::uint64_t budget)
    : Error(ErrorCode::kBudgetExceeded,
            std::to_string(subsets) + " subsets exceed the budget of " +
                std::to_string(budget) + "; use the sampled estimate"),
      subsets_(subsets) {}

ConvergenceError::ConvergenceError(const std::string& what)
    : Error(ErrorCode::kConvergenceFailure, what) {}

}  // namespace kaczmarz
