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
#include <optional>
#include <utility>
#include <vector>

#include "bnm/losses.hpp"
#include "bnm/matrix.hpp"

namespace bnm {

/// Two-domain Gaussian mixture: class means are seeded random unit directions
/// scaled by class_separation; target samples are the same mixture shifted by
/// domain_shift, with class proportions target_proportions (source classes
/// are balanced).
struct SyntheticConfig {
  std::size_t feature_dim = 5;
  std::size_t categories = 3;
  std::size_t source_per_class = 200;
  std::size_t target_total = 300;
  std::vector<double> target_proportions;  // length = categories, sums to 1
  std::vector<double> domain_shift;        // length = feature_dim
  double class_separation = 2.0;
  double noise_sigma = 0.5;
  std::uint64_t seed = 7;
};

struct Dataset {
  Matrix source_x;
  std::vector<std::size_t> source_y;
  Matrix target_x;
  /// Target labels are never used for training, only for evaluation and
  /// per-batch diversity ground truth.
  std::vector<std::size_t> target_eval_y;
  std::size_t categories = 0;
  /// True when categories > feature_dim + 1: the class means cannot be
  /// mutually well separated and results are expected to degrade.
  bool degenerate_geometry = false;
};

/// Linear classifier producing logits x W^T + bias.
struct SoftmaxClassifier {
  Matrix weights;             // categories x feature_dim
  std::vector<double> bias;   // categories

  static SoftmaxClassifier zeros(std::size_t categories,
                                 std::size_t feature_dim);
  Matrix logits(const Matrix& x) const;
};

/// Training objective. kEntMin and kBfm are the comparison baselines
/// (target-entropy minimization and target Frobenius-norm maximization);
/// the rest map onto LossVariant.
enum class TrainVariant { kEntMin, kBfm, kBnm, kBnm2, kFbnm, kFbnm2 };

struct TrainConfig {
  TrainVariant variant = TrainVariant::kBnm;
  double lambda = 0.5;
  double learning_rate = 0.1;
  std::size_t steps = 500;
  std::size_t batch_source = 36;
  std::size_t batch_target = 36;
  /// Number of batches stacked before the norm terms apply (1 = every step).
  std::size_t k = 3;
  /// Component count for the fast variants; 0 = min(rows, cols).
  std::size_t d = 0;
  std::uint64_t seed = 42;
  /// Optional norm trade-off study: replaces the target term by
  /// -(w_nuclear * norm + w_frobenius * ||A||_F) / B. Requires k = 1.
  std::optional<double> w_nuclear;
  std::optional<double> w_frobenius;
  bool legacy_multibatch_norm = false;
};

/// Per-step metrics, captured before the parameter update. For the baseline
/// variants the `bnmax` column holds their target auxiliary term (entropy or
/// negative scaled Frobenius norm), so total = cls + lambda * (bnmax + bnmin)
/// holds for every variant.
struct TrainRecord {
  std::size_t step = 0;
  double cls = 0.0;
  double bnmax = 0.0;
  double bnmin = 0.0;
  double total = 0.0;
  double source_entropy = 0.0;
  double target_entropy = 0.0;
  double diversity_ratio = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  SoftmaxClassifier model;
  std::vector<TrainRecord> log;
  double final_accuracy = 0.0;
  /// Mean per-batch diversity ratio over the last min(50, steps) steps.
  double final_diversity_ratio = 0.0;
};

Dataset generate_dataset(const SyntheticConfig& config);

/// Fraction of rows whose logit argmax equals the label. Throws
/// EmptyMatrixError for an empty set and DimensionMismatchError on shape
/// mismatches.
double evaluate(const SoftmaxClassifier& model, const Matrix& features,
                const std::vector<std::size_t>& labels);

/// Baseline target terms (value, d(value)/dA).
std::pair<double, Matrix> entropy_min_loss(const PredictionMatrix& a_target);
std::pair<double, Matrix> bfm_loss(const PredictionMatrix& a_target);

/// Plain gradient descent on mini-batches sampled with replacement. Fully
/// deterministic for a fixed config; with lambda = 0 every variant takes the
/// identical source-only path, so their runs agree bitwise.
/// Throws NonFiniteLossError (with step index) on divergence.
TrainResult train(SoftmaxClassifier model, const Dataset& data,
                  const TrainConfig& config);

}  // namespace bnm
