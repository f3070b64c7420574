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
#include <span>
#include <vector>

namespace bnm {

/// Scalar objectives timed against each other: exact nuclear norm, entropy
/// and the fast column-norm surrogate.
enum class BenchMethod { kNuclear, kEntropy, kFastNuclear };

const char* bench_method_name(BenchMethod method);

struct BenchSize {
  std::size_t b = 0;
  std::size_t c = 0;
};

struct BenchResult {
  std::size_t b = 0;
  std::size_t c = 0;
  BenchMethod method = BenchMethod::kNuclear;
  /// Accumulated evaluation time; matrix generation and warm-up excluded.
  double total_seconds = 0.0;
  std::size_t repeats = 0;
};

/// Times each method over `repeats` seeded random row-stochastic matrices per
/// size. All methods see the identical matrix sequence for a size. Runs
/// single-threaded on the monotonic clock; min(10, repeats) warm-up
/// evaluations per method are discarded. Matrices are generated in bounded
/// chunks outside the timed region, so memory stays flat even for large
/// sizes. Throws ValidationError for empty sizes or zero repeats.
std::vector<BenchResult> run_bench(std::span<const BenchSize> sizes,
                                   std::size_t repeats, std::uint64_t seed);

/// Least-squares slope of log(seconds per evaluation) against log(n) over the
/// square sizes (b == c) for one method — the empirical scaling exponent.
/// Throws InsufficientDataError with fewer than three distinct square sizes.
double scaling_fit(std::span<const BenchResult> results, BenchMethod method);

}  // namespace bnm
