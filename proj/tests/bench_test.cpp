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

#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "bnm/bench.hpp"
#include "bnm/errors.hpp"
#include "support.hpp"

using namespace bnm;

namespace {

std::vector<BenchResult> synthetic_results(double exponent) {
  std::vector<BenchResult> results;
  for (std::size_t n : {50, 100, 200, 400}) {
    BenchResult r;
    r.b = n;
    r.c = n;
    r.method = BenchMethod::kNuclear;
    r.repeats = 2;
    r.total_seconds =
        2.0 * 1e-9 * std::pow(static_cast<double>(n), exponent);
    results.push_back(r);
  }
  return results;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(std::string(bench_method_name(BenchMethod::kNuclear)) == "nuclear");
  CHECK(std::string(bench_method_name(BenchMethod::kEntropy)) == "entropy");
  CHECK(std::string(bench_method_name(BenchMethod::kFastNuclear)) ==
        "fast_nuclear");
}

TEST_CASE("scaling fit recovers synthetic exponents") {
  CHECK(test::close(scaling_fit(synthetic_results(3.0), BenchMethod::kNuclear),
                    3.0, 1e-6));
  CHECK(test::close(scaling_fit(synthetic_results(2.0), BenchMethod::kNuclear),
                    2.0, 1e-6));
  CHECK(test::close(scaling_fit(synthetic_results(1.0), BenchMethod::kNuclear),
                    1.0, 1e-6));
}

TEST_CASE("scaling fit requires three square sizes") {
  std::vector<BenchResult> results = synthetic_results(2.0);
  results.resize(2);
  CHECK_THROWS_AS(scaling_fit(results, BenchMethod::kNuclear),
                  InsufficientDataError);

  // Non-square entries do not count toward the three.
  std::vector<BenchResult> mixed = synthetic_results(2.0);
  mixed.resize(2);
  BenchResult wide;
  wide.b = 300;
  wide.c = 100;
  wide.method = BenchMethod::kNuclear;
  wide.repeats = 2;
  wide.total_seconds = 1.0;
  mixed.push_back(wide);
  CHECK_THROWS_AS(scaling_fit(mixed, BenchMethod::kNuclear),
                  InsufficientDataError);

  // Results for other methods do not count either.
  std::vector<BenchResult> other = synthetic_results(2.0);
  CHECK_THROWS_AS(scaling_fit(other, BenchMethod::kEntropy),
                  InsufficientDataError);
}

TEST_CASE("bench run produces one result per size and method") {
  const std::vector<BenchSize> sizes = {{12, 8}, {16, 16}};
  const std::vector<BenchResult> results = run_bench(sizes, 5, 3);
  REQUIRE(results.size() == 6);
  for (const BenchResult& r : results) {
    CHECK(r.repeats == 5);
    CHECK(r.total_seconds > 0.0);
    const bool known_size =
        (r.b == 12 && r.c == 8) || (r.b == 16 && r.c == 16);
    CHECK(known_size);
  }
  // Each (size, method) pair appears exactly once.
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      const bool same = results[i].b == results[j].b &&
                        results[i].c == results[j].c &&
                        results[i].method == results[j].method;
      CHECK_FALSE(same);
    }
  }
}

TEST_CASE("bench input validation") {
  const std::vector<BenchSize> none;
  CHECK_THROWS_AS(run_bench(none, 5, 3), ValidationError);
  const std::vector<BenchSize> sizes = {{4, 4}};
  CHECK_THROWS_AS(run_bench(sizes, 0, 3), ValidationError);
  const std::vector<BenchSize> degenerate = {{0, 4}};
  CHECK_THROWS_AS(run_bench(degenerate, 5, 3), ValidationError);
}
