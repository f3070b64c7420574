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

#include <cmath>
#include <cstdint>

#include "bnm/matrix.hpp"
#include "bnm/rng.hpp"

namespace bnm::test {

/// Seeded random row-stochastic matrix: softmax of scaled standard-normal
/// logits. `stream` separates independent draws under one seed.
inline Matrix random_softmax(std::uint64_t seed, std::uint64_t stream,
                             std::size_t b, std::size_t c,
                             double logit_scale = 1.0) {
  Rng rng(seed, stream);
  Matrix logits(b, c);
  for (double& x : logits.data()) {
    x = logit_scale * rng.next_normal();
  }
  return softmax_rows(logits);
}

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <=
         tol * std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace bnm::test
