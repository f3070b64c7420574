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

#include "bnm/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bnm/errors.hpp"
#include "bnm/gradients.hpp"
#include "bnm/metrics.hpp"

namespace bnm {
namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0)) {
    throw ValidationError("lambda must be >= 0, got " +
                          std::to_string(lambda));
  }
}

// Shared core of the two norm terms: sign * norm(A) / denom_rows with the
// matching gradient. Both the single-batch and the multi-batch paths go
// through here so that k = 1 multi-batch reproduces combined_loss bitwise.
std::pair<double, Matrix> norm_term(const PredictionMatrix& a, bool fast,
                                    std::size_t d, double sign,
                                    std::size_t denom_rows) {
  const std::size_t dd = d == 0 ? std::min(a.rows(), a.cols()) : d;
  double value;
  Matrix grad;
  if (fast) {
    value = fast_nuclear_norm_of(a.matrix(), dd);
    grad = fast_nuclear_grad(a.matrix(), dd);
  } else {
    value = nuclear_norm_of(a.matrix());
    grad = nuclear_grad(a.matrix());
  }
  const double scale = sign / static_cast<double>(denom_rows);
  for (double& g : grad.data()) {
    g *= scale;
  }
  return {scale * value, std::move(grad)};
}

// Multiplies every entry by lambda in place.
void scale_by(Matrix& m, double factor) {
  for (double& x : m.data()) {
    x *= factor;
  }
}

}  // namespace

LabelBatch::LabelBatch(std::vector<std::size_t> labels, std::size_t categories)
    : labels_(std::move(labels)), categories_(categories) {
  if (labels_.empty()) {
    throw EmptyListError("label batch is empty");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= categories_) {
      throw DimensionMismatchError(
          "label " + std::to_string(labels_[i]) + " at position " +
          std::to_string(i) + " outside [0, " + std::to_string(categories_) +
          ")");
    }
  }
}

Matrix LabelBatch::one_hot() const {
  Matrix m(labels_.size(), categories_);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    m(i, labels_[i]) = 1.0;
  }
  return m;
}

bool variant_uses_fast(LossVariant v) {
  return v == LossVariant::kFbnm || v == LossVariant::kFbnm2;
}

bool variant_uses_source_norm(LossVariant v) {
  return v == LossVariant::kBnm2 || v == LossVariant::kFbnm2;
}

std::pair<double, Matrix> cls_loss(const PredictionMatrix& a,
                                   const LabelBatch& labels) {
  if (labels.size() != a.rows() || labels.categories() != a.cols()) {
    throw DimensionMismatchError(
        "labels (" + std::to_string(labels.size()) + " x " +
        std::to_string(labels.categories()) + ") do not match predictions (" +
        std::to_string(a.rows()) + " x " + std::to_string(a.cols()) + ")");
  }
  const double inv_b = 1.0 / static_cast<double>(a.rows());
  double loss = 0.0;
  Matrix grad(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double p = a.matrix()(i, labels[i]);
    if (p <= 0.0) {
      throw ZeroProbabilityError("zero probability at labeled entry (" +
                                 std::to_string(i) + ", " +
                                 std::to_string(labels[i]) + ")");
    }
    loss -= inv_b * std::log(p);
    grad(i, labels[i]) = -inv_b / p;
  }
  return {loss, std::move(grad)};
}

std::pair<double, Matrix> bnmax_loss(const PredictionMatrix& a, bool fast,
                                     std::size_t d) {
  return norm_term(a, fast, d, -1.0, a.rows());
}

std::pair<double, Matrix> bnmin_loss(const PredictionMatrix& a, bool fast,
                                     std::size_t d) {
  return norm_term(a, fast, d, 1.0, a.rows());
}

LossBreakdown combined_loss(const PredictionMatrix& a_source,
                            const LabelBatch& labels,
                            const PredictionMatrix& a_target,
                            LossVariant variant, double lambda,
                            std::size_t d) {
  check_lambda(lambda);
  const bool fast = variant_uses_fast(variant);

  LossBreakdown out;
  out.lambda = lambda;
  auto [cls_value, cls_grad] = cls_loss(a_source, labels);
  out.cls = cls_value;

  auto [bnmax_value, bnmax_grad] = bnmax_loss(a_target, fast, d);
  out.bnmax = bnmax_value;
  scale_by(bnmax_grad, lambda);
  out.grad_target = std::move(bnmax_grad);

  if (variant_uses_source_norm(variant)) {
    auto [bnmin_value, bnmin_grad] = bnmin_loss(a_source, fast, d);
    out.bnmin = bnmin_value;
    scale_by(bnmin_grad, lambda);
    for (std::size_t idx = 0; idx < cls_grad.data().size(); ++idx) {
      cls_grad.data()[idx] += bnmin_grad.data()[idx];
    }
  }
  out.grad_source = std::move(cls_grad);
  out.total = out.cls + lambda * (out.bnmax + out.bnmin);
  return out;
}

MultiBatchBuffer::MultiBatchBuffer(std::size_t k) : k_(k) {
  if (k_ == 0) {
    throw ValidationError("multi-batch count k must be >= 1");
  }
}

std::optional<ReadyStack> MultiBatchBuffer::push(const PredictionMatrix& batch) {
  if (columns_ == 0) {
    columns_ = batch.cols();
  } else if (batch.cols() != columns_) {
    throw ColumnMismatchError("pushed batch has " +
                              std::to_string(batch.cols()) +
                              " categories, buffer expects " +
                              std::to_string(columns_));
  }
  stored_.push_back(batch);
  if (stored_.size() < k_) {
    return std::nullopt;
  }
  ReadyStack ready{stack(stored_), 0, 0};
  ready.mask_end = ready.stacked.rows();
  ready.mask_begin = ready.mask_end - stored_.back().rows();
  stored_.clear();
  return ready;
}

LossBreakdown multibatch_bnm_step(MultiBatchBuffer& source_buffer,
                                  MultiBatchBuffer& target_buffer,
                                  const PredictionMatrix& a_source,
                                  const LabelBatch& labels,
                                  const PredictionMatrix& a_target,
                                  LossVariant variant, double lambda,
                                  std::size_t d, bool legacy_norm) {
  check_lambda(lambda);
  if (source_buffer.k() != target_buffer.k()) {
    throw ValidationError("source and target buffers must share k");
  }
  const bool fast = variant_uses_fast(variant);

  LossBreakdown out;
  out.lambda = lambda;
  auto [cls_value, cls_grad] = cls_loss(a_source, labels);
  out.cls = cls_value;

  std::optional<ReadyStack> ready_source = source_buffer.push(a_source);
  std::optional<ReadyStack> ready_target = target_buffer.push(a_target);
  if (ready_source.has_value() != ready_target.has_value()) {
    throw ValidationError("source and target buffers are out of phase");
  }

  if (!ready_target) {
    // Still filling: classification only, no gradient to the target batch.
    out.norms_ready = false;
    out.grad_source = std::move(cls_grad);
    out.total = out.cls;
    return out;
  }

  const auto masked_norm_grad = [&](const ReadyStack& ready, double sign,
                                    std::size_t current_rows) {
    const std::size_t denom =
        legacy_norm ? current_rows : ready.stacked.rows();
    auto [value, grad] = norm_term(ready.stacked, fast, d, sign, denom);
    scale_by(grad, lambda);
    // Older batches are held as constants: their rows carry no gradient.
    for (std::size_t i = 0; i < ready.mask_begin; ++i) {
      for (std::size_t j = 0; j < grad.cols(); ++j) {
        grad(i, j) = 0.0;
      }
    }
    return std::make_pair(value, std::move(grad));
  };

  auto [bnmax_value, target_grad] =
      masked_norm_grad(*ready_target, -1.0, a_target.rows());
  out.bnmax = bnmax_value;
  out.grad_target = std::move(target_grad);

  Matrix source_grad(ready_source->stacked.rows(),
                     ready_source->stacked.cols());
  for (std::size_t r = 0; r < a_source.rows(); ++r) {
    for (std::size_t j = 0; j < source_grad.cols(); ++j) {
      source_grad(ready_source->mask_begin + r, j) = cls_grad(r, j);
    }
  }
  if (variant_uses_source_norm(variant)) {
    auto [bnmin_value, bnmin_grad] =
        masked_norm_grad(*ready_source, 1.0, a_source.rows());
    out.bnmin = bnmin_value;
    for (std::size_t idx = 0; idx < source_grad.data().size(); ++idx) {
      source_grad.data()[idx] += bnmin_grad.data()[idx];
    }
  }
  out.grad_source = std::move(source_grad);
  out.total = out.cls + lambda * (out.bnmax + out.bnmin);
  return out;
}

}  // namespace bnm
