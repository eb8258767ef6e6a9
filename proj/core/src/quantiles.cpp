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

#include "kaczmarz/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "kaczmarz/errors.hpp"

namespace kaczmarz {

std::size_t quantile_rank(double q, std::size_t m) {
  const double scaled = std::floor(q * static_cast<double>(m) + 0.5);
  if (!(scaled > 0.0)) return 0;
  if (scaled >= static_cast<double>(m)) return m;
  return static_cast<std::size_t>(scaled);
}

double multiset_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "quantile of an empty multiset");
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidQuantiles, "q must lie in (0, 1], got " + std::to_string(q));
  }
  const std::size_t k = std::max<std::size_t>(1, quantile_rank(q, values.size()));
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end());
  return sorted[k - 1];
}

QuantilePartition partition_two_sided(std::span<const double> values,
                                      std::optional<double> q0, double q1,
                                      std::span<const std::size_t> keys) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "partition of an empty multiset");
  if (!keys.empty() && keys.size() != values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "keys and values differ in length");
  }
  if (!(q1 > 0.0 && q1 <= 1.0)) {
    throw Error(ErrorCode::kInvalidQuantiles, "q1 must lie in (0, 1]");
  }
  if (q0 && !(*q0 >= 0.0 && *q0 < q1)) {
    throw Error(ErrorCode::kInvalidQuantiles, "need 0 <= q0 < q1");
  }

  const std::size_t m = values.size();
  const std::size_t lower_count = q0 ? quantile_rank(*q0, m) : 0;
  const std::size_t upper_rank = quantile_rank(q1, m);
  if (upper_rank <= lower_count) {
    throw Error(ErrorCode::kInvalidQuantiles,
                "quantiles select no entries after rounding (m = " + std::to_string(m) + ")");
  }

  std::vector<std::pair<double, std::size_t>> order(m);
  for (std::size_t i = 0; i < m; ++i) {
    order[i] = {values[i], keys.empty() ? i : keys[i]};
  }
  std::sort(order.begin(), order.end());

  QuantilePartition out;
  out.q0 = q0;
  out.q1 = q1;
  if (lower_count > 0) out.lower_value = order[lower_count - 1].first;
  out.upper_value = order[upper_rank - 1].first;
  for (std::size_t r = 0; r < m; ++r) {
    auto& block = r < lower_count ? out.lower : r < upper_rank ? out.admissible : out.upper;
    block.push_back(order[r].second);
  }
  return out;
}

}  // namespace kaczmarz
