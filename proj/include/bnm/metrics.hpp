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

/// Scalar measurements of one prediction matrix together with the analytic
/// bound chain that links them:
///   sqrt(B/C) <= ||A||_F <= ||A||_* <= sqrt(D) * ||A||_F <= sqrt(D * B),
/// where D = min(B, C).
struct BoundsReport {
  double entropy = 0.0;
  double frobenius = 0.0;
  double nuclear = 0.0;
  double fast_nuclear = 0.0;
  double f_lower = 0.0;        // sqrt(B/C)
  double f_upper = 0.0;        // sqrt(B)
  double nuclear_upper = 0.0;  // sqrt(D * B)
  bool chain_ok = false;       // every link holds within 1e-9 relative
};

// Kernels on plain matrices, used where inputs are constructed internally
// (gradient probes, benchmark batches) and validation would be redundant.
double entropy_of(const Matrix& a);
double frobenius_norm_of(const Matrix& a);
double nuclear_norm_of(const Matrix& a);
double fast_nuclear_norm_of(const Matrix& a, std::size_t d);

/// Mean row entropy, natural log, with 0 * log(0) := 0 (entries below 1e-300
/// contribute nothing).
double entropy(const PredictionMatrix& a);
double frobenius_norm(const PredictionMatrix& a);
/// Sum of singular values.
double nuclear_norm(const PredictionMatrix& a);
/// Sum of the d largest column L2 norms: an O(B*C) surrogate for the nuclear
/// norm that needs no decomposition. Ties select the lower column index.
/// Throws InvalidDError unless 1 <= d <= C.
double fast_nuclear_norm(const PredictionMatrix& a, std::size_t d);
/// fast_nuclear_norm with the default component count d = min(B, C).
double fast_nuclear_norm(const PredictionMatrix& a);

/// Number of distinct columns that are a row argmax; argmax ties break to the
/// lowest column index.
std::size_t predicted_category_count(const PredictionMatrix& a);
/// predicted_category_count / ground_truth_count.
/// Throws ZeroGroundTruthError when ground_truth_count is 0.
double diversity_ratio(const PredictionMatrix& a,
                       std::size_t ground_truth_count);
/// Count of singular values above the clamp threshold.
std::size_t effective_rank(const PredictionMatrix& a);

BoundsReport bounds_report(const PredictionMatrix& a);

/// w_nuclear * ||A||_* + w_frobenius * ||A||_F, the objective used by the
/// norm trade-off study.
double weighted_norm_objective(const PredictionMatrix& a, double w_nuclear,
                               double w_frobenius);

/// Column L2 norms of a.
std::vector<double> column_norms_of(const Matrix& a);
/// Indices of the d largest values, descending by value, ties by lower index.
std::vector<std::size_t> top_indices(const std::vector<double>& values,
                                     std::size_t d);
/// Per-row argmax column, ties to the lowest index.
std::vector<std::size_t> row_argmax(const Matrix& a);

}  // namespace bnm
