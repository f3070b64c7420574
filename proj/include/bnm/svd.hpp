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
#include <vector>

#include "bnm/matrix.hpp"

namespace bnm {

/// Thin singular value decomposition A = U diag(sigma) V^T with
/// D = min(rows, cols) retained components.
struct SvdResult {
  /// Descending; values below the clamp threshold are exactly 0.
  std::vector<double> singular_values;
  Matrix left;   // rows x D, orthonormal columns
  Matrix right;  // cols x D, orthonormal columns
};

/// Threshold below which singular values are clamped to exactly zero:
/// machine epsilon * max(rows, cols) * sigma_max.
double singular_value_clamp(std::size_t rows, std::size_t cols,
                            double sigma_max);

/// One-sided Jacobi SVD, applied to whichever of A or A^T has fewer columns.
/// Deterministic: fixed cyclic pair order, no randomized pivoting, identical
/// input bits give identical output bits. Columns of U belonging to clamped
/// singular values are filled by deterministic orthonormal completion.
/// Throws EmptyMatrixError for an empty input and ConvergenceError if the
/// sweep budget (60) is exhausted.
SvdResult svd(const Matrix& a);
SvdResult svd(const PredictionMatrix& a);

/// Singular values only: same rotations and clamping as svd(), but no
/// accumulation of the factor matrices. Used by norm evaluation and the
/// benchmark, where only the spectrum is needed.
std::vector<double> singular_values(const Matrix& a);
std::vector<double> singular_values(const PredictionMatrix& a);

}  // namespace bnm
