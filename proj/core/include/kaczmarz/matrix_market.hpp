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

#include <filesystem>
#include <iosfwd>

#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

// Matrix Market I/O for real matrices. Reads coordinate and array formats
// with general, symmetric or skew-symmetric storage (integer fields are
// accepted as real). Complex and pattern fields are rejected.

DenseMatrix read_matrix_market(std::istream& in);
/// Throws kFileError when the file cannot be opened.
DenseMatrix load_matrix_market(const std::filesystem::path& path);

enum class MarketFormat { kArray, kCoordinate };

/// Values use the shortest round-trip decimal form, so re-reading is exact.
void write_matrix_market(std::ostream& out, const DenseMatrix& a,
                         MarketFormat format = MarketFormat::kArray);
void save_matrix_market(const std::filesystem::path& path, const DenseMatrix& a,
                        MarketFormat format = MarketFormat::kArray);

}  // namespace kaczmarz
