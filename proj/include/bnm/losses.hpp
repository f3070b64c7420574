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
#include <optional>
#include <utility>
#include <vector>

#include "bnm/matrix.hpp"

namespace bnm {

/// Hard labels for a batch, stored as category indices in [0, categories).
class LabelBatch {
 public:
  /// Throws EmptyListError for an empty batch and DimensionMismatchError for
  /// an index outside [0, categories).
  LabelBatch(std::vector<std::size_t> labels, std::size_t categories);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t categories() const noexcept { return categories_; }
  std::size_t operator[](std::size_t i) const { return labels_[i]; }

  /// Equivalent one-hot indicator matrix (size x categories).
  Matrix one_hot() const;

 private:
  std::vector<std::size_t> labels_;
  std::size_t categories_;
};

/// Objective family. The *2 variants add the source batch-norm minimization
/// term; the F* variants replace the exact nuclear norm by the fast
/// column-norm surrogate.
enum class LossVariant { kBnm, kBnm2, kFbnm, kFbnm2 };

bool variant_uses_fast(LossVariant v);
bool variant_uses_source_norm(LossVariant v);

/// One training step's loss values and gradients. `total` is always
/// cls + lambda * (bnmax + bnmin). While a multi-batch buffer is still
/// filling, norms_ready is false, the norm terms are zero and grad_target is
/// absent (no gradient flows to the target batch that step).
struct LossBreakdown {
  double cls = 0.0;
  double bnmax = 0.0;
  double bnmin = 0.0;
  double lambda = 0.0;
  double total = 0.0;
  bool norms_ready = true;
  std::optional<Matrix> grad_source;
  std::optional<Matrix> grad_target;
};

/// Mean negative log-likelihood of the labeled entries, with its gradient.
/// Throws DimensionMismatchError on batch-size mismatch and
/// ZeroProbabilityError if a labeled entry is zero.
std::pair<double, Matrix> cls_loss(const PredictionMatrix& a,
                                   const LabelBatch& labels);

/// Batch-norm maximization term: -(1/B) * norm(A), to be *minimized*.
/// `fast` selects the column-norm surrogate with component count d
/// (0 = min(B, C)).
std::pair<double, Matrix> bnmax_loss(const PredictionMatrix& a, bool fast,
                                     std::size_t d = 0);

/// Batch-norm minimization term: +(1/B) * norm(A).
std::pair<double, Matrix> bnmin_loss(const PredictionMatrix& a, bool fast,
                                     std::size_t d = 0);

/// Full single-batch objective on a (source, target) pair.
/// Throws ValidationError for lambda < 0.
LossBreakdown combined_loss(const PredictionMatrix& a_source,
                            const LabelBatch& labels,
                            const PredictionMatrix& a_target,
                            LossVariant variant, double lambda,
                            std::size_t d = 0);

/// Stacked batch handed out once a buffer holds k records. Rows in
/// [mask_begin, mask_end) belong to the most recent batch — the only rows
/// through which gradients may flow.
struct ReadyStack {
  PredictionMatrix stacked;
  std::size_t mask_begin = 0;
  std::size_t mask_end = 0;
};

/// Sliding store of the last k prediction batches. push() returns the stacked
/// matrix every k-th call and clears the store; between those calls fewer
/// than k batches are held. All pushed batches must share the category count.
class MultiBatchBuffer {
 public:
  explicit MultiBatchBuffer(std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return stored_.size(); }
  /// Category count, 0 until the first push.
  std::size_t columns() const noexcept { return columns_; }

  std::optional<ReadyStack> push(const PredictionMatrix& batch);

 private:
  std::size_t k_;
  std::size_t columns_ = 0;
  std::vector<PredictionMatrix> stored_;
};

/// One optimization step of the multi-batch objective. The classification
/// term always applies to the current source batch; the norm terms apply to
/// the stacked matrices on ready steps only. On ready steps the gradients
/// are stacked-size with rows outside the current-batch mask exactly zero,
/// and are normalized by the stacked row count (pass legacy_norm = true for
/// the current-batch row count instead). With k = 1 every step is ready and
/// the result matches combined_loss bitwise.
LossBreakdown multibatch_bnm_step(MultiBatchBuffer& source_buffer,
                                  MultiBatchBuffer& target_buffer,
                                  const PredictionMatrix& a_source,
                                  const LabelBatch& labels,
                                  const PredictionMatrix& a_target,
                                  LossVariant variant, double lambda,
                                  std::size_t d = 0, bool legacy_norm = false);

}  // namespace bnm
