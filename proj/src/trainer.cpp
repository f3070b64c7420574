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

#include "bnm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "bnm/errors.hpp"
#include "bnm/gradients.hpp"
#include "bnm/metrics.hpp"
#include "bnm/rng.hpp"

namespace bnm {
namespace {

void check_synthetic_config(const SyntheticConfig& cfg) {
  if (cfg.feature_dim == 0 || cfg.categories < 2) {
    throw ValidationError("need feature_dim >= 1 and categories >= 2");
  }
  if (cfg.source_per_class == 0 || cfg.target_total == 0) {
    throw ValidationError("need source_per_class >= 1 and target_total >= 1");
  }
  if (cfg.target_proportions.size() != cfg.categories) {
    throw DimensionMismatchError(
        "target_proportions has " +
        std::to_string(cfg.target_proportions.size()) + " entries, expected " +
        std::to_string(cfg.categories));
  }
  double sum = 0.0;
  for (double p : cfg.target_proportions) {
    if (p < 0.0) {
      throw ValidationError("target proportions must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("target proportions sum to " + std::to_string(sum) +
                          ", expected 1");
  }
  if (cfg.domain_shift.size() != cfg.feature_dim) {
    throw DimensionMismatchError("domain_shift has " +
                                 std::to_string(cfg.domain_shift.size()) +
                                 " entries, expected " +
                                 std::to_string(cfg.feature_dim));
  }
  if (!(cfg.noise_sigma > 0.0)) {
    throw ValidationError("noise_sigma must be > 0");
  }
}

// Integer class counts from proportions via largest remainder; deterministic
// (remainder ties resolve to the lower class index).
std::vector<std::size_t> allocate_counts(const std::vector<double>& proportions,
                                         std::size_t total) {
  const std::size_t n = proportions.size();
  std::vector<std::size_t> counts(n);
  std::vector<double> remainders(n);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = proportions[k] * static_cast<double>(total);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainders[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return remainders[a] > remainders[b];
                   });
  for (std::size_t k = 0; assigned < total; ++k) {
    ++counts[order[k % n]];
    ++assigned;
  }
  return counts;
}

// dL/dZ for one softmax row: dz_j = a_j * (g_j - <a, g>).
void softmax_backward_row(std::span<const double> a, std::span<const double> g,
                          std::span<double> dz) {
  double dot = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * g[j];
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    dz[j] = a[j] * (g[j] - dot);
  }
}

struct BatchSample {
  Matrix x;
  std::vector<std::size_t> y;
};

BatchSample sample_batch(const Matrix& features,
                         const std::vector<std::size_t>& labels,
                         std::size_t batch, Rng& rng) {
  BatchSample out;
  out.x = Matrix(batch, features.cols());
  out.y.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t idx = rng.next_below(features.rows());
    for (std::size_t j = 0; j < features.cols(); ++j) {
      out.x(i, j) = features(idx, j);
    }
    out.y[i] = labels[idx];
  }
  return out;
}

std::size_t distinct_count(const std::vector<std::size_t>& labels) {
  return std::set<std::size_t>(labels.begin(), labels.end()).size();
}

LossVariant to_loss_variant(TrainVariant v) {
  switch (v) {
    case TrainVariant::kBnm:
      return LossVariant::kBnm;
    case TrainVariant::kBnm2:
      return LossVariant::kBnm2;
    case TrainVariant::kFbnm:
      return LossVariant::kFbnm;
    case TrainVariant::kFbnm2:
      return LossVariant::kFbnm2;
    default:
      throw ValidationError("variant has no norm-loss mapping");
  }
}

}  // namespace

Dataset generate_dataset(const SyntheticConfig& cfg) {
  check_synthetic_config(cfg);

  // Class means: seeded random unit directions scaled by class_separation.
  Rng mean_rng(cfg.seed, 0);
  Matrix means(cfg.categories, cfg.feature_dim);
  for (std::size_t k = 0; k < cfg.categories; ++k) {
    double norm2 = 0.0;
    for (std::size_t jj = 0; jj < cfg.feature_dim; ++jj) {
      const double v = mean_rng.next_normal();
      means(k, jj) = v;
      norm2 += v * v;
    }
    const double scale = cfg.class_separation / std::sqrt(norm2);
    for (std::size_t jj = 0; jj < cfg.feature_dim; ++jj) {
      means(k, jj) *= scale;
    }
  }

  Dataset data;
  data.categories = cfg.categories;
  data.degenerate_geometry = cfg.categories > cfg.feature_dim + 1;

  const std::size_t n_source = cfg.categories * cfg.source_per_class;
  data.source_x = Matrix(n_source, cfg.feature_dim);
  data.source_y.resize(n_source);
  Rng source_rng(cfg.seed, 1);
  std::size_t row = 0;
  for (std::size_t k = 0; k < cfg.categories; ++k) {
    for (std::size_t s = 0; s < cfg.source_per_class; ++s, ++row) {
      for (std::size_t jj = 0; jj < cfg.feature_dim; ++jj) {
        data.source_x(row, jj) =
            means(k, jj) + cfg.noise_sigma * source_rng.next_normal();
      }
      data.source_y[row] = k;
    }
  }

  const std::vector<std::size_t> counts =
      allocate_counts(cfg.target_proportions, cfg.target_total);
  data.target_x = Matrix(cfg.target_total, cfg.feature_dim);
  data.target_eval_y.resize(cfg.target_total);
  Rng target_rng(cfg.seed, 2);
  row = 0;
  for (std::size_t k = 0; k < cfg.categories; ++k) {
    for (std::size_t s = 0; s < counts[k]; ++s, ++row) {
      for (std::size_t jj = 0; jj < cfg.feature_dim; ++jj) {
        data.target_x(row, jj) = means(k, jj) + cfg.domain_shift[jj] +
                                 cfg.noise_sigma * target_rng.next_normal();
      }
      data.target_eval_y[row] = k;
    }
  }
  return data;
}

SoftmaxClassifier SoftmaxClassifier::zeros(std::size_t categories,
                                           std::size_t feature_dim) {
  SoftmaxClassifier model;
  model.weights = Matrix(categories, feature_dim);
  model.bias.assign(categories, 0.0);
  return model;
}

Matrix SoftmaxClassifier::logits(const Matrix& x) const {
  if (x.cols() != weights.cols()) {
    throw DimensionMismatchError("features have " + std::to_string(x.cols()) +
                                 " dimensions, model expects " +
                                 std::to_string(weights.cols()));
  }
  Matrix z(x.rows(), weights.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t cpos = 0; cpos < weights.rows(); ++cpos) {
      double sum = bias[cpos];
      for (std::size_t jj = 0; jj < weights.cols(); ++jj) {
        sum += x(i, jj) * weights(cpos, jj);
      }
      z(i, cpos) = sum;
    }
  }
  return z;
}

double evaluate(const SoftmaxClassifier& model, const Matrix& features,
                const std::vector<std::size_t>& labels) {
  if (features.rows() == 0) {
    throw EmptyMatrixError("evaluation set is empty");
  }
  if (labels.size() != features.rows()) {
    throw DimensionMismatchError("evaluation labels do not match features");
  }
  const Matrix z = model.logits(features);
  const std::vector<std::size_t> pred = row_argmax(z);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == labels[i]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

std::pair<double, Matrix> entropy_min_loss(const PredictionMatrix& a_target) {
  return {entropy(a_target), entropy_grad(a_target)};
}

std::pair<double, Matrix> bfm_loss(const PredictionMatrix& a_target) {
  const double inv_b = 1.0 / static_cast<double>(a_target.rows());
  Matrix grad = frobenius_grad(a_target);
  for (double& g : grad.data()) {
    g *= -inv_b;
  }
  return {-inv_b * frobenius_norm(a_target), std::move(grad)};
}

TrainResult train(SoftmaxClassifier model, const Dataset& data,
                  const TrainConfig& cfg) {
  if (data.source_x.rows() == 0 || data.target_x.rows() == 0) {
    throw EmptyMatrixError("training needs non-empty source and target sets");
  }
  if (cfg.batch_source == 0 || cfg.batch_target == 0 || cfg.steps == 0) {
    throw ValidationError("batch sizes and step count must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw ValidationError("learning rate must be > 0");
  }
  if (!(cfg.lambda >= 0.0)) {
    throw ValidationError("lambda must be >= 0");
  }
  if (cfg.k == 0) {
    throw ValidationError("k must be >= 1");
  }
  const bool tradeoff =
      cfg.w_nuclear.has_value() || cfg.w_frobenius.has_value();
  if (tradeoff && cfg.k != 1) {
    throw ValidationError("norm trade-off weights require k = 1");
  }
  const std::size_t n_cat = data.categories;
  const std::size_t dim = data.source_x.cols();
  if (model.weights.rows() != n_cat || model.weights.cols() != dim) {
    throw DimensionMismatchError("model shape does not match the dataset");
  }

  Rng batch_rng(cfg.seed, 0);
  MultiBatchBuffer source_buffer(cfg.k);
  MultiBatchBuffer target_buffer(cfg.k);

  TrainResult result;
  result.log.reserve(cfg.steps);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    // Batch sampling consumes the RNG in a fixed order for every variant,
    // which keeps lambda = 0 runs bit-identical across objectives.
    const BatchSample src =
        sample_batch(data.source_x, data.source_y, cfg.batch_source, batch_rng);
    const BatchSample tgt = sample_batch(data.target_x, data.target_eval_y,
                                         cfg.batch_target, batch_rng);

    std::optional<PredictionMatrix> forward_src;
    std::optional<PredictionMatrix> forward_tgt;
    try {
      forward_src = softmax(model.logits(src.x));
      forward_tgt = softmax(model.logits(tgt.x));
    } catch (const NonFiniteInputError&) {
      // Finite-but-huge parameters can overflow the logits; that is
      // divergence, not bad input.
      throw NonFiniteLossError(step);
    }
    const PredictionMatrix& a_src = *forward_src;
    const PredictionMatrix& a_tgt = *forward_tgt;
    const LabelBatch labels(src.y, n_cat);

    LossBreakdown breakdown;
    try {
      if (cfg.lambda == 0.0) {
        // Source-only training: identical path for every variant.
        auto [cls_value, cls_grad] = cls_loss(a_src, labels);
        breakdown.cls = cls_value;
        breakdown.total = cls_value;
        breakdown.grad_source = std::move(cls_grad);
      } else if (cfg.variant == TrainVariant::kEntMin ||
                 cfg.variant == TrainVariant::kBfm) {
        auto [cls_value, cls_grad] = cls_loss(a_src, labels);
        auto [aux_value, aux_grad] = cfg.variant == TrainVariant::kEntMin
                                         ? entropy_min_loss(a_tgt)
                                         : bfm_loss(a_tgt);
        breakdown.cls = cls_value;
        breakdown.bnmax = aux_value;  // auxiliary target term for baselines
        breakdown.lambda = cfg.lambda;
        breakdown.total = cls_value + cfg.lambda * aux_value;
        breakdown.grad_source = std::move(cls_grad);
        for (double& g : aux_grad.data()) {
          g *= cfg.lambda;
        }
        breakdown.grad_target = std::move(aux_grad);
      } else if (tradeoff) {
        auto [cls_value, cls_grad] = cls_loss(a_src, labels);
        const double wn = cfg.w_nuclear.value_or(0.0);
        const double wf = cfg.w_frobenius.value_or(0.0);
        const bool fast = cfg.variant == TrainVariant::kFbnm ||
                          cfg.variant == TrainVariant::kFbnm2;
        const std::size_t dd =
            cfg.d == 0 ? std::min(a_tgt.rows(), a_tgt.cols()) : cfg.d;
        const double inv_b = 1.0 / static_cast<double>(a_tgt.rows());
        const double norm_value = fast
                                      ? fast_nuclear_norm(a_tgt, dd)
                                      : nuclear_norm(a_tgt);
        Matrix norm_grad = fast ? fast_nuclear_grad(a_tgt, dd)
                                : nuclear_grad(a_tgt.matrix());
        const Matrix f_grad = frobenius_grad(a_tgt);
        const double value =
            -inv_b * (wn * norm_value + wf * frobenius_norm(a_tgt));
        for (std::size_t idx = 0; idx < norm_grad.data().size(); ++idx) {
          norm_grad.data()[idx] =
              cfg.lambda * -inv_b *
              (wn * norm_grad.data()[idx] + wf * f_grad.data()[idx]);
        }
        breakdown.cls = cls_value;
        breakdown.bnmax = value;
        breakdown.lambda = cfg.lambda;
        breakdown.total = cls_value + cfg.lambda * value;
        breakdown.grad_source = std::move(cls_grad);
        breakdown.grad_target = std::move(norm_grad);
      } else {
        breakdown = multibatch_bnm_step(
            source_buffer, target_buffer, a_src, labels, a_tgt,
            to_loss_variant(cfg.variant), cfg.lambda, cfg.d,
            cfg.legacy_multibatch_norm);
      }
    } catch (const ZeroProbabilityError&) {
      // Saturated predictions: the labeled entry underflowed to zero, so the
      // classification loss is infinite. Divergence, not bad input.
      throw NonFiniteLossError(step);
    } catch (const ZeroEntryError&) {
      throw NonFiniteLossError(step);  // entropy gradient at a hard zero
    } catch (const ZeroColumnError&) {
      throw NonFiniteLossError(step);  // fast norm selected an all-zero column
    }

    if (!std::isfinite(breakdown.total)) {
      throw NonFiniteLossError(step);
    }

    // Backpropagation through softmax into the linear layer. On multi-batch
    // ready steps the gradients are stacked-size; the current batch always
    // occupies the trailing rows.
    Matrix d_weights(n_cat, dim);
    std::vector<double> d_bias(n_cat, 0.0);
    std::vector<double> dz(n_cat);
    const auto accumulate = [&](const Matrix& grad, const PredictionMatrix& a,
                                const Matrix& x) {
      const std::size_t offset = grad.rows() - a.rows();
      for (std::size_t i = 0; i < a.rows(); ++i) {
        softmax_backward_row(a.matrix().row(i), grad.row(offset + i), dz);
        for (std::size_t cpos = 0; cpos < n_cat; ++cpos) {
          d_bias[cpos] += dz[cpos];
          for (std::size_t jj = 0; jj < dim; ++jj) {
            d_weights(cpos, jj) += dz[cpos] * x(i, jj);
          }
        }
      }
    };
    if (breakdown.grad_source) {
      accumulate(*breakdown.grad_source, a_src, src.x);
    }
    if (breakdown.grad_target) {
      accumulate(*breakdown.grad_target, a_tgt, tgt.x);
    }

    TrainRecord record;
    record.step = step;
    record.cls = breakdown.cls;
    record.bnmax = breakdown.bnmax;
    record.bnmin = breakdown.bnmin;
    record.total = breakdown.total;
    record.source_entropy = entropy(a_src);
    record.target_entropy = entropy(a_tgt);
    record.diversity_ratio = diversity_ratio(a_tgt, distinct_count(tgt.y));
    record.accuracy = evaluate(model, data.target_x, data.target_eval_y);
    result.log.push_back(record);

    bool finite = true;
    for (std::size_t cpos = 0; cpos < n_cat; ++cpos) {
      model.bias[cpos] -= cfg.learning_rate * d_bias[cpos];
      finite = finite && std::isfinite(model.bias[cpos]);
      for (std::size_t jj = 0; jj < dim; ++jj) {
        model.weights(cpos, jj) -= cfg.learning_rate * d_weights(cpos, jj);
        finite = finite && std::isfinite(model.weights(cpos, jj));
      }
    }
    if (!finite) {
      throw NonFiniteLossError(step);
    }
  }

  result.final_accuracy = evaluate(model, data.target_x, data.target_eval_y);
  const std::size_t window = std::min<std::size_t>(50, result.log.size());
  double ratio_sum = 0.0;
  for (std::size_t i = result.log.size() - window; i < result.log.size();
       ++i) {
    ratio_sum += result.log[i].diversity_ratio;
  }
  result.final_diversity_ratio = ratio_sum / static_cast<double>(window);
  result.model = std::move(model);
  return result;
}

}  // namespace bnm
