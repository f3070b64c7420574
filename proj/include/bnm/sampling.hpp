/*
 * Copyright 2026 The bnm authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>

namespace bnm {

/// How many of c categories receive 0, 1, 2 or >= 3 of b uniform
/// with-replacement draws, expressed as percentages of c (rows sum to 100).
struct OccupancyStats {
  double ratio_0 = 0.0;
  double ratio_1 = 0.0;
  double ratio_2 = 0.0;
  double ratio_3plus = 0.0;
  std::size_t c = 0;
  std::size_t b = 0;
  std::size_t trials = 0;  // 0 for the analytic result
};

/// Monte Carlo estimate over `trials` independent experiments. Each trial
/// consumes its own RNG stream, so the result is bit-identical for any
/// `partitions` value (threads only split the trial range; per-bucket tallies
/// are integers and commute). Throws ValidationError for c, b or trials of 0.
OccupancyStats occupancy_monte_carlo(std::size_t c, std::size_t b,
                                     std::size_t trials, std::uint64_t seed,
                                     unsigned partitions = 1);

/// Closed-form expectation: category occupancy is Binomial(b, 1/c).
/// Evaluated in log space so large b and c do not overflow.
OccupancyStats occupancy_analytic(std::size_t c, std::size_t b);

/// Expected number of distinct categories hit: c * (1 - (1 - 1/c)^b).
double expected_category_count(std::size_t c, std::size_t b);

}  // namespace bnm
