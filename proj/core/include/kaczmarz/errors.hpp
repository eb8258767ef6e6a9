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
#include <stdexcept>
#include <string>
#include <string_view>

namespace kaczmarz {

enum class ErrorCode {
  kZeroRow,
  kDimensionMismatch,
  kConvergenceFailure,
  kEmptyInput,
  kInvalidQuantiles,
  kEmptyAdmissibleSet,
  kAllZeroWeights,
  kInvalidArgument,
  kParseError,
  kUnsupportedField,
  kFileError,
  kBudgetExceeded,
  kHypothesisViolation,
  kDegenerateConditioning,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Base of every error thrown by the library. `code()` identifies the
/// failure class; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ZeroRowError : public Error {
 public:
  explicit ZeroRowError(std::size_t row);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BudgetExceededError : public Error {
 public:
  BudgetExceededError(std::uint64_t subsets, std::uint64_t budget);
  std::uint64_t subsets() const noexcept { return subsets_; }

 private:
  std::uint64_t subsets_;
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what);
};

}  // namespace kaczmarz
