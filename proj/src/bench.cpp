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

#include "bnm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <vector>

#include "bnm/errors.hpp"
#include "bnm/matrix.hpp"
#include "bnm/metrics.hpp"
#include "bnm/rng.hpp"

namespace bnm {
namespace {

// Cap on the matrices held in memory at once: chunked generation keeps the
// footprint near this bound no matter how many repeats are requested.
constexpr std::size_t kChunkBudgetBytes = 256ull << 20;

using Clock = std::chrono::steady_clock;

double evaluate_method(BenchMethod method, const Matrix& m) {
  switch (method) {
    case BenchMethod::kNuclear:
      return nuclear_norm_of(m);
    case BenchMethod::kEntropy:
      return entropy_of(m);
    case BenchMethod::kFastNuclear:
      return fast_nuclear_norm_of(m, std::min(m.rows(), m.cols()));
  }
  throw ValidationError("unknown benchmark method");
}

// Row-stochastic matrix number `index` of the sequence for (seed, size):
// softmax of standard normal logits, one RNG stream per matrix so chunk
// boundaries cannot change the sequence.
Matrix generate_matrix(std::size_t b, std::size_t c, std::uint64_t seed,
                       std::uint64_t size_key, std::size_t index) {
  Rng rng(seed ^ size_key, index);
  Matrix logits(b, c);
  for (double& x : logits.data()) {
    x = rng.next_normal();
  }
  return softmax_rows(logits);
}

}  // namespace

const char* bench_method_name(BenchMethod method) {
  switch (method) {
    case BenchMethod::kNuclear:
      return "nuclear";
    case BenchMethod::kEntropy:
      return "entropy";
    case BenchMethod::kFastNuclear:
      return "fast_nuclear";
  }
  return "unknown";
}

std::vector<BenchResult> run_bench(std::span<const BenchSize> sizes,
                                   std::size_t repeats, std::uint64_t seed) {
  if (sizes.empty()) {
    throw ValidationError("benchmark needs at least one size");
  }
  if (repeats == 0) {
    throw ValidationError("benchmark needs at least one repeat");
  }
  constexpr BenchMethod kMethods[] = {BenchMethod::kNuclear,
                                      BenchMethod::kEntropy,
                                      BenchMethod::kFastNuclear};

  // The accumulator defeats dead-code elimination of the timed calls.
  volatile double sink = 0.0;

  std::vector<BenchResult> results;
  std::uint64_t size_key = 0;
  for (const BenchSize& size : sizes) {
    ++size_key;
    if (size.b == 0 || size.c == 0) {
      throw ValidationError("benchmark sizes must be positive");
    }
    const std::size_t matrix_bytes = size.b * size.c * sizeof(double);
    const std::size_t chunk_len = std::clamp<std::size_t>(
        kChunkBudgetBytes / std::max<std::size_t>(matrix_bytes, 1), 1,
        repeats);

    double totals[3] = {0.0, 0.0, 0.0};
    const std::size_t warmup = std::min<std::size_t>(10, repeats);
    bool warmed = false;
    std::vector<Matrix> chunk;
    for (std::size_t begin = 0; begin < repeats; begin += chunk.size()) {
      const std::size_t len = std::min(chunk_len, repeats - begin);
      chunk.clear();
      chunk.reserve(len);
      for (std::size_t i = 0; i < len; ++i) {
        chunk.push_back(
            generate_matrix(size.b, size.c, seed, size_key, begin + i));
      }
      for (std::size_t mi = 0; mi < 3; ++mi) {
        if (!warmed) {
          for (std::size_t i = 0; i < warmup && i < len; ++i) {
            sink = sink + evaluate_method(kMethods[mi], chunk[i]);
          }
        }
        const Clock::time_point start = Clock::now();
        for (const Matrix& m : chunk) {
          sink = sink + evaluate_method(kMethods[mi], m);
        }
        totals[mi] +=
            std::chrono::duration<double>(Clock::now() - start).count();
      }
      warmed = true;
    }
    for (std::size_t mi = 0; mi < 3; ++mi) {
      results.push_back(
          {size.b, size.c, kMethods[mi], totals[mi], repeats});
    }
  }
  return results;
}

double scaling_fit(std::span<const BenchResult> results, BenchMethod method) {
  std::map<std::size_t, std::pair<double, std::size_t>> square;
  for (const BenchResult& r : results) {
    if (r.method == method && r.b == r.c && r.repeats > 0 &&
        r.total_seconds > 0.0) {
      square[r.b] = {r.total_seconds, r.repeats};
    }
  }
  if (square.size() < 3) {
    throw InsufficientDataError(
        "scaling fit needs at least 3 distinct square sizes, got " +
        std::to_string(square.size()));
  }
  // Least-squares line through (log n, log seconds-per-eval).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(square.size());
  for (const auto& [side, total_and_repeats] : square) {
    const double x = std::log(static_cast<double>(side));
    const double y = std::log(total_and_repeats.first /
                              static_cast<double>(total_and_repeats.second));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace bnm
