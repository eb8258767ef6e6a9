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
#include <optional>
#include <span>
#include <vector>

namespace kaczmarz {

/// Number of entries a q-quantile covers in a multiset of size m:
/// round-half-up of q*m, clamped to [0, m].
std::size_t quantile_rank(double q, std::size_t m);

/// Order-statistic quantile: the k-th smallest value, k = quantile_rank(q, |S|)
/// clamped to [1, |S|]. No interpolation. q must lie in (0, 1].
double multiset_quantile(std::span<const double> values, double q);

/// Split of a multiset by one or two quantiles.
///
/// Entries are ordered by (value, key) so that ties among equal values are
/// resolved by ascending key. `lower` holds the first quantile_rank(q0, m)
/// keys, `admissible` the next up to quantile_rank(q1, m), `upper` the rest.
struct QuantilePartition {
  std::optional<double> q0;
  double q1 = 1.0;
  /// Largest value in `lower`; absent when `lower` is empty.
  std::optional<double> lower_value;
  /// Largest value in `lower` followed by `admissible`.
  double upper_value = 0.0;
  std::vector<std::size_t> lower;
  std::vector<std::size_t> admissible;
  std::vector<std::size_t> upper;
};

/// `keys` defaults to 0..m-1. Throws kInvalidQuantiles unless
/// 0 <= q0 < q1 <= 1 and the admissible block is nonempty after rounding,
/// kEmptyInput for an empty multiset.
QuantilePartition partition_two_sided(std::span<const double> values,
                                      std::optional<double> q0, double q1,
                                      std::span<const std::size_t> keys = {});

}  // namespace kaczmarz
