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

#include "bnm/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>
#include <vector>

#include "bnm/errors.hpp"
#include "bnm/rng.hpp"

namespace bnm {
namespace {

void check_args(std::size_t c, std::size_t b) {
  if (c == 0) {
    throw ValidationError("category count c must be >= 1");
  }
  if (b == 0) {
    throw ValidationError("draw count b must be >= 1");
  }
}

// Tallies of categories drawn 0/1/2/3+ times, accumulated over trials.
// Integer so that accumulation order (and thus thread partitioning) cannot
// change the result.
struct BucketCounts {
  std::array<std::uint64_t, 4> n{};

  BucketCounts& operator+=(const BucketCounts& o) {
    for (std::size_t k = 0; k < 4; ++k) {
      n[k] += o.n[k];
    }
    return *this;
  }
};

BucketCounts run_trials(std::size_t c, std::size_t b, std::size_t begin,
                        std::size_t end, std::uint64_t seed) {
  BucketCounts total;
  std::vector<std::uint32_t> hits(c);
  for (std::size_t trial = begin; trial < end; ++trial) {
    Rng rng(seed, trial);  // one stream per trial
    std::fill(hits.begin(), hits.end(), 0);
    for (std::size_t draw = 0; draw < b; ++draw) {
      ++hits[rng.next_below(c)];
    }
    for (std::uint32_t h : hits) {
      ++total.n[h < 3 ? h : 3];
    }
  }
  return total;
}

}  // namespace

OccupancyStats occupancy_monte_carlo(std::size_t c, std::size_t b,
                                     std::size_t trials, std::uint64_t seed,
                                     unsigned partitions) {
  check_args(c, b);
  if (trials == 0) {
    throw ValidationError("trial count must be >= 1");
  }
  if (partitions == 0) {
    partitions = 1;
  }

  BucketCounts total;
  if (partitions == 1) {
    total = run_trials(c, b, 0, trials, seed);
  } else {
    std::vector<BucketCounts> partial(partitions);
    std::vector<std::thread> workers;
    const std::size_t chunk = (trials + partitions - 1) / partitions;
    for (unsigned p = 0; p < partitions; ++p) {
      const std::size_t begin = std::min<std::size_t>(p * chunk, trials);
      const std::size_t end = std::min<std::size_t>(begin + chunk, trials);
      workers.emplace_back([&partial, p, c, b, begin, end, seed] {
        partial[p] = run_trials(c, b, begin, end, seed);
      });
    }
    for (std::thread& w : workers) {
      w.join();
    }
    for (const BucketCounts& p : partial) {
      total += p;
    }
  }

  const double denom = 100.0 / (static_cast<double>(trials) *
                                static_cast<double>(c));
  OccupancyStats stats;
  stats.ratio_0 = static_cast<double>(total.n[0]) * denom;
  stats.ratio_1 = static_cast<double>(total.n[1]) * denom;
  stats.ratio_2 = static_cast<double>(total.n[2]) * denom;
  stats.ratio_3plus = static_cast<double>(total.n[3]) * denom;
  stats.c = c;
  stats.b = b;
  stats.trials = trials;
  return stats;
}

OccupancyStats occupancy_analytic(std::size_t c, std::size_t b) {
  check_args(c, b);
  OccupancyStats stats;
  stats.c = c;
  stats.b = b;
  if (c == 1) {
    // The single category receives every draw.
    stats.ratio_0 = 0.0;
    stats.ratio_1 = b == 1 ? 100.0 : 0.0;
    stats.ratio_2 = b == 2 ? 100.0 : 0.0;
    stats.ratio_3plus = b >= 3 ? 100.0 : 0.0;
    return stats;
  }
  // P(hits = k) for Binomial(b, 1/c), in log space to avoid overflow.
  const double log_p = -std::log(static_cast<double>(c));
  const double log_q = std::log1p(-1.0 / static_cast<double>(c));
  const double bd = static_cast<double>(b);
  std::array<double, 3> prob{};
  for (std::size_t k = 0; k <= 2 && k <= b; ++k) {
    const double kd = static_cast<double>(k);
    const double log_binom = std::lgamma(bd + 1.0) - std::lgamma(kd + 1.0) -
                             std::lgamma(bd - kd + 1.0);
    prob[k] = std::exp(log_binom + kd * log_p + (bd - kd) * log_q);
  }
  stats.ratio_0 = 100.0 * prob[0];
  stats.ratio_1 = b >= 1 ? 100.0 * prob[1] : 0.0;
  stats.ratio_2 = b >= 2 ? 100.0 * prob[2] : 0.0;
  stats.ratio_3plus = std::max(
      0.0, 100.0 - stats.ratio_0 - stats.ratio_1 - stats.ratio_2);
  if (!std::isfinite(stats.ratio_0) || !std::isfinite(stats.ratio_3plus)) {
    throw NumericalOverflowError("occupancy probabilities are not finite");
  }
  return stats;
}

double expected_category_count(std::size_t c, std::size_t b) {
  check_args(c, b);
  // (1 - 1/c)^b by binary exponentiation: exact for the small cases the
  // tests pin (e.g. c = b = 2 -> 1.5) and accurate for large b.
  const double q = 1.0 - 1.0 / static_cast<double>(c);
  double power = 1.0;
  double base = q;
  std::size_t e = b;
  while (e > 0) {
    if (e & 1) {
      power *= base;
    }
    base *= base;
    e >>= 1;
  }
  return static_cast<double>(c) * (1.0 - power);
}

}  // namespace bnm
