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
#include <cstddef>
#include <vector>

#include <doctest.h>

#include "bnm/gradients.hpp"
#include "bnm/metrics.hpp"
#include "bnm/trainer.hpp"
#include "support.hpp"

using namespace bnm;

namespace {

SyntheticConfig small_config() {
  SyntheticConfig cfg;
  cfg.feature_dim = 5;
  cfg.categories = 3;
  cfg.source_per_class = 40;
  cfg.target_total = 60;
  cfg.target_proportions = {0.7, 0.2, 0.1};
  cfg.domain_shift = {0.4, 0.4, 0.4, 0.4, 0.4};
  cfg.seed = 7;
  return cfg;
}

// The reference imbalanced task: hard enough that the entropy baseline
// visibly under-covers the minority class. Every pinned margin below comes
// from a first oracle run on exactly this configuration.
SyntheticConfig imbalanced_config() {
  SyntheticConfig cfg;
  cfg.target_total = 300;
  cfg.target_proportions = {0.7, 0.2, 0.1};
  const double shift = 1.0 / std::sqrt(5.0);
  cfg.domain_shift = {shift, shift, shift, shift, shift};
  cfg.class_separation = 1.0;
  cfg.seed = 13;
  return cfg;
}

TrainConfig imbalanced_train_config(TrainVariant variant) {
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.lambda = 0.5;
  cfg.learning_rate = 0.1;
  cfg.steps = 500;
  cfg.batch_source = 36;
  cfg.batch_target = 36;
  cfg.k = 1;
  cfg.seed = 42;
  return cfg;
}

std::vector<std::size_t> label_counts(const std::vector<std::size_t>& labels,
                                      std::size_t categories) {
  std::vector<std::size_t> counts(categories, 0);
  for (std::size_t y : labels) {
    ++counts[y];
  }
  return counts;
}

bool records_equal(const TrainRecord& a, const TrainRecord& b) {
  return a.step == b.step && a.cls == b.cls && a.bnmax == b.bnmax &&
         a.bnmin == b.bnmin && a.total == b.total &&
         a.source_entropy == b.source_entropy &&
         a.target_entropy == b.target_entropy &&
         a.diversity_ratio == b.diversity_ratio && a.accuracy == b.accuracy;
}

}  // namespace

TEST_CASE("synthetic dataset shapes and allocation") {
  const Dataset data = generate_dataset(small_config());
  CHECK(data.source_x.rows() == 120);
  CHECK(data.source_x.cols() == 5);
  CHECK(data.source_y.size() == 120);
  CHECK(data.target_x.rows() == 60);
  CHECK(data.target_eval_y.size() == 60);
  CHECK(data.categories == 3);
  CHECK_FALSE(data.degenerate_geometry);

  // Source classes are balanced; target follows the proportions exactly
  // (0.7 / 0.2 / 0.1 of 60 are all integers).
  CHECK(label_counts(data.source_y, 3) ==
        std::vector<std::size_t>{40, 40, 40});
  CHECK(label_counts(data.target_eval_y, 3) ==
        std::vector<std::size_t>{42, 12, 6});

  // Same config, same data, bitwise.
  const Dataset again = generate_dataset(small_config());
  CHECK(data.source_x == again.source_x);
  CHECK(data.target_x == again.target_x);
  CHECK(data.source_y == again.source_y);
}

TEST_CASE("largest remainder allocation rounds deterministically") {
  SyntheticConfig cfg = small_config();
  cfg.target_total = 10;
  // Bitwise-identical proportions so the remainders tie exactly; the spare
  // unit must then go to the lowest class index. (The sum is within an ulp
  // of 1, well inside the validation tolerance.)
  const double third = 1.0 / 3.0;
  cfg.target_proportions = {third, third, third};
  const Dataset data = generate_dataset(cfg);
  CHECK(label_counts(data.target_eval_y, 3) ==
        std::vector<std::size_t>{4, 3, 3});
}

TEST_CASE("degenerate geometry is flagged") {
  SyntheticConfig cfg = small_config();
  cfg.feature_dim = 2;
  cfg.categories = 4;
  cfg.target_proportions = {0.25, 0.25, 0.25, 0.25};
  cfg.domain_shift = {0.0, 0.0};
  CHECK(generate_dataset(cfg).degenerate_geometry);
}

TEST_CASE("synthetic config validation") {
  SyntheticConfig cfg = small_config();
  cfg.target_proportions = {0.5, 0.5};
  CHECK_THROWS_AS(generate_dataset(cfg), DimensionMismatchError);

  cfg = small_config();
  cfg.target_proportions = {0.5, 0.4, 0.2};
  CHECK_THROWS_AS(generate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.target_proportions = {0.9, 0.2, -0.1};
  CHECK_THROWS_AS(generate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.domain_shift = {0.0};
  CHECK_THROWS_AS(generate_dataset(cfg), DimensionMismatchError);

  cfg = small_config();
  cfg.noise_sigma = 0.0;
  CHECK_THROWS_AS(generate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.categories = 1;
  cfg.target_proportions = {1.0};
  CHECK_THROWS_AS(generate_dataset(cfg), ValidationError);
}

TEST_CASE("classifier evaluation") {
  // A weight matrix aligned with the class means separates the source set.
  const Dataset data = generate_dataset(small_config());
  SoftmaxClassifier model = SoftmaxClassifier::zeros(3, 5);
  // Estimate each class mean from the data itself.
  const std::vector<std::size_t> counts = label_counts(data.source_y, 3);
  for (std::size_t i = 0; i < data.source_x.rows(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      model.weights(data.source_y[i], j) +=
          data.source_x(i, j) / static_cast<double>(counts[data.source_y[i]]);
    }
  }
  CHECK(evaluate(model, data.source_x, data.source_y) > 0.9);

  CHECK_THROWS_AS(evaluate(model, Matrix(), {}), EmptyMatrixError);
  CHECK_THROWS_AS(evaluate(model, data.source_x, data.target_eval_y),
                  DimensionMismatchError);
}

TEST_CASE("baseline target terms match the metric kernels") {
  const PredictionMatrix a =
      PredictionMatrix::from_rows(test::random_softmax(71, 0, 6, 3));
  const auto [h, h_grad] = entropy_min_loss(a);
  CHECK(h == entropy(a));
  CHECK(h_grad == entropy_grad(a));

  const auto [f, f_grad] = bfm_loss(a);
  const double inv_b = 1.0 / 6.0;
  CHECK(f == -inv_b * frobenius_norm(a));
  const Matrix expected = frobenius_grad(a);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(f_grad(i, j) == expected(i, j) * -inv_b);
    }
  }
}

TEST_CASE("training is deterministic") {
  const Dataset data = generate_dataset(small_config());
  TrainConfig cfg;
  cfg.variant = TrainVariant::kBnm;
  cfg.steps = 20;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  cfg.k = 2;

  const TrainResult r1 = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
  const TrainResult r2 = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
  CHECK(r1.model.weights == r2.model.weights);
  CHECK(r1.model.bias == r2.model.bias);
  REQUIRE(r1.log.size() == 20);
  REQUIRE(r2.log.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(records_equal(r1.log[i], r2.log[i]));
  }
}

TEST_CASE("lambda zero collapses every variant onto the same run") {
  const Dataset data = generate_dataset(small_config());
  TrainConfig base;
  base.lambda = 0.0;
  base.steps = 20;
  base.batch_source = 12;
  base.batch_target = 12;

  std::optional<TrainResult> reference;
  for (TrainVariant v :
       {TrainVariant::kEntMin, TrainVariant::kBfm, TrainVariant::kBnm,
        TrainVariant::kBnm2, TrainVariant::kFbnm, TrainVariant::kFbnm2}) {
    TrainConfig cfg = base;
    cfg.variant = v;
    TrainResult r = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
    if (!reference) {
      reference = std::move(r);
      continue;
    }
    CAPTURE(static_cast<int>(v));
    CHECK(r.model.weights == reference->model.weights);
    CHECK(r.model.bias == reference->model.bias);
    REQUIRE(r.log.size() == reference->log.size());
    for (std::size_t i = 0; i < r.log.size(); ++i) {
      CHECK(records_equal(r.log[i], reference->log[i]));
      CHECK(r.log[i].bnmax == 0.0);
      CHECK(r.log[i].bnmin == 0.0);
    }
  }
}

TEST_CASE("every variant trains without incident") {
  const Dataset data = generate_dataset(small_config());
  for (TrainVariant v :
       {TrainVariant::kEntMin, TrainVariant::kBfm, TrainVariant::kBnm,
        TrainVariant::kBnm2, TrainVariant::kFbnm, TrainVariant::kFbnm2}) {
    for (std::size_t k : {std::size_t{1}, std::size_t{3}}) {
      CAPTURE(static_cast<int>(v));
      CAPTURE(k);
      TrainConfig cfg;
      cfg.variant = v;
      cfg.k = k;
      cfg.steps = 60;
      cfg.batch_source = 12;
      cfg.batch_target = 12;
      const TrainResult r = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
      CHECK(r.log.size() == 60);
      CHECK(r.final_accuracy > 0.4);  // clearly above the 1/3 chance level
      CHECK(r.final_diversity_ratio > 0.0);
      // The recorded diversity summary matches its definition.
      double mean = 0.0;
      for (std::size_t i = 10; i < 60; ++i) {
        mean += r.log[i].diversity_ratio;
      }
      mean /= 50.0;
      CHECK(test::close(r.final_diversity_ratio, mean, 1e-12));
    }
  }
}

TEST_CASE("multi-batch pending steps skip the norm terms") {
  const Dataset data = generate_dataset(small_config());
  TrainConfig cfg;
  cfg.variant = TrainVariant::kBnm;
  cfg.k = 3;
  cfg.steps = 7;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  const TrainResult r = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
  for (std::size_t i = 0; i < 7; ++i) {
    const bool ready = (i + 1) % 3 == 0;
    CAPTURE(i);
    CHECK((r.log[i].bnmax != 0.0) == ready);
    CHECK(r.log[i].total ==
          (ready ? r.log[i].cls + 0.5 * (r.log[i].bnmax + r.log[i].bnmin)
                 : r.log[i].cls));
  }
}

TEST_CASE("legacy multi-batch normalization doubles the ready-step term") {
  const Dataset data = generate_dataset(small_config());
  TrainConfig cfg;
  cfg.variant = TrainVariant::kBnm;
  cfg.k = 2;
  cfg.steps = 2;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  const TrainResult modern = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
  cfg.legacy_multibatch_norm = true;
  const TrainResult legacy = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
  // Identical batches up to the first ready step, so the values differ by
  // exactly the k factor in the denominator.
  CHECK(legacy.log[1].bnmax == 2.0 * modern.log[1].bnmax);
}

TEST_CASE("norm trade-off path") {
  const Dataset data = generate_dataset(small_config());
  TrainConfig cfg;
  cfg.variant = TrainVariant::kBnm;
  cfg.k = 1;
  cfg.steps = 3;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  cfg.w_nuclear = 1.0;
  cfg.w_frobenius = 0.0;
  const TrainResult tradeoff =
      train(SoftmaxClassifier::zeros(3, 5), data, cfg);

  TrainConfig plain = cfg;
  plain.w_nuclear.reset();
  plain.w_frobenius.reset();
  const TrainResult bnm = train(SoftmaxClassifier::zeros(3, 5), data, plain);
  // With w_nuclear = 1 and w_frobenius = 0 the first step sees the exact
  // nuclear-norm target term.
  CHECK(tradeoff.log[0].bnmax == bnm.log[0].bnmax);

  TrainConfig bad = cfg;
  bad.k = 3;
  CHECK_THROWS_AS(train(SoftmaxClassifier::zeros(3, 5), data, bad),
                  ValidationError);
}

TEST_CASE("training configuration validation") {
  const Dataset data = generate_dataset(small_config());
  const SoftmaxClassifier model = SoftmaxClassifier::zeros(3, 5);

  TrainConfig cfg;
  cfg.steps = 0;
  CHECK_THROWS_AS(train(model, data, cfg), ValidationError);

  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(model, data, cfg), ValidationError);

  cfg = TrainConfig{};
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(train(model, data, cfg), ValidationError);

  cfg = TrainConfig{};
  cfg.k = 0;
  CHECK_THROWS_AS(train(model, data, cfg), ValidationError);

  CHECK_THROWS_AS(train(SoftmaxClassifier::zeros(4, 5), data, TrainConfig{}),
                  DimensionMismatchError);
}

TEST_CASE("nuclear objectives beat the baselines on the imbalanced task") {
  const Dataset data = generate_dataset(imbalanced_config());
  const auto run = [&data](TrainVariant v) {
    return train(SoftmaxClassifier::zeros(3, 5), data,
                 imbalanced_train_config(v));
  };
  const TrainResult entmin = run(TrainVariant::kEntMin);
  const TrainResult bfm = run(TrainVariant::kBfm);
  const TrainResult bnm = run(TrainVariant::kBnm);
  const TrainResult fbnm = run(TrainVariant::kFbnm);

  // Oracle run: entmin 0.807/0.800, bfm 0.850/0.913, bnm 0.860/0.953,
  // fbnm 0.860/0.960 (accuracy/diversity). Margins pinned from those values
  // with one-batch slack.
  CHECK(bnm.final_diversity_ratio >= entmin.final_diversity_ratio + 0.14);
  CHECK(bnm.final_diversity_ratio >= bfm.final_diversity_ratio);
  CHECK(bnm.final_accuracy >= entmin.final_accuracy + 0.04);
  CHECK(std::abs(fbnm.final_accuracy - bnm.final_accuracy) <= 0.03);
}

TEST_CASE("imbalanced task converges for every stacking depth") {
  const Dataset data = generate_dataset(imbalanced_config());
  for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    CAPTURE(k);
    TrainConfig cfg = imbalanced_train_config(TrainVariant::kBnm);
    cfg.k = k;
    const TrainResult r = train(SoftmaxClassifier::zeros(3, 5), data, cfg);
    CHECK(r.log.size() == 500);
    CHECK(r.final_accuracy > 0.8);
  }
}

TEST_CASE("frobenius weight trades accuracy on the imbalanced task") {
  const Dataset data = generate_dataset(imbalanced_config());
  const double weights[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  double accuracy[5];
  for (int i = 0; i < 5; ++i) {
    TrainConfig cfg = imbalanced_train_config(TrainVariant::kBnm);
    cfg.w_nuclear = 1.0;
    cfg.w_frobenius = weights[i];
    accuracy[i] =
        train(SoftmaxClassifier::zeros(3, 5), data, cfg).final_accuracy;
  }
  // Pinned outcome of the oracle sweep (0.867, 0.863, 0.860, 0.860, 0.857):
  // pushing the Frobenius norm down (negative weight) raises the effective
  // rank of the predictions, which on this task helps accuracy slightly, so
  // accuracy is non-increasing in the Frobenius weight rather than peaking
  // at zero.
  for (int i = 0; i + 1 < 5; ++i) {
    CAPTURE(i);
    CHECK(accuracy[i] >= accuracy[i + 1]);
  }
  CHECK(accuracy[0] > accuracy[4]);
}

TEST_CASE("divergence aborts with the step index") {
  const Dataset data = generate_dataset(small_config());
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  cfg.learning_rate = 1e308;  // guarantees a non-finite update immediately
  bool thrown = false;
  try {
    train(SoftmaxClassifier::zeros(3, 5), data, cfg);
  } catch (const NonFiniteLossError& e) {
    thrown = true;
    CHECK(e.step() < 3);
  }
  CHECK(thrown);
}
