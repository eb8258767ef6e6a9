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
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz {

enum class Distribution { kGaussian, kUniform };

/// Sparse right-hand-side corruption: round(beta*m) entries drawn without
/// replacement receive U(magnitude_low, magnitude_high) * scale.
struct CorruptionSpec {
  double beta = 0.0;
  double magnitude_low = 0.0;
  double magnitude_high = 1.0;
  double scale = 1.0;
  std::uint64_t seed = 0;
};

/// i.i.d. N(0,1) or U(0,1) entries.
struct GeneratedSource {
  Distribution distribution = Distribution::kGaussian;
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Matrix Market file, optionally perturbed by `gaussian_scale` * G before
/// normalization (G i.i.d. standard normal, drawn from `perturbation_seed`).
struct FileSource {
  std::filesystem::path path;
  double gaussian_scale = 0.0;
  std::uint64_t perturbation_seed = 0;
};

struct ProblemSpec {
  std::variant<GeneratedSource, FileSource> source;
  bool normalize = true;
  std::optional<CorruptionSpec> corruption;
  std::uint64_t solution_seed = 0;
};

struct Corruption {
  Vector b;
  std::vector<std::size_t> support;  // ascending
};

/// Throws kInvalidArgument for beta outside [0, 1) or low > high.
Corruption corrupt(const Vector& b_true, const CorruptionSpec& spec);

DenseMatrix random_matrix(Distribution distribution, std::size_t m, std::size_t n,
                          std::uint64_t seed);

/// Draws (or loads) A, optionally row-normalizes it, plants x* ~ N(0, I),
/// sets b_t = A x* and applies the corruption. Normalization happens before
/// b_t is formed, so corruption magnitudes are relative to unit rows.
DenseSystem generate_system(const ProblemSpec& spec);

/// (b_i / |a_i|^2) a_i, the point of hyperplane i closest to the origin.
Vector initial_iterate_on_hyperplane(const DenseMatrix& a, const Vector& b, std::size_t i);

}  // namespace kaczmarz
