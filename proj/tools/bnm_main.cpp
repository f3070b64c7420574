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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnm/bench.hpp"
#include "bnm/errors.hpp"
#include "bnm/gradients.hpp"
#include "bnm/losses.hpp"
#include "bnm/matrix.hpp"
#include "bnm/matrix_io.hpp"
#include "bnm/metrics.hpp"
#include "bnm/rng.hpp"
#include "bnm/sampling.hpp"
#include "bnm/svd.hpp"
#include "bnm/trainer.hpp"

namespace {

using bnm::format_number;

// Writes to --out when given, standard output otherwise.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        throw bnm::ValidationError("cannot open output file '" + path + "'");
      }
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token = comma == std::string::npos
                                  ? text.substr(start)
                                  : text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) {
        throw std::invalid_argument(token);
      }
      values.push_back(v);
    } catch (const std::exception&) {
      throw bnm::ValidationError("invalid number '" + token + "' in list");
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return values;
}

std::vector<bnm::BenchSize> parse_sizes(const std::string& text) {
  std::vector<bnm::BenchSize> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token = comma == std::string::npos
                                  ? text.substr(start)
                                  : text.substr(start, comma - start);
    const std::size_t x = token.find('x');
    bool ok = x != std::string::npos;
    bnm::BenchSize size;
    if (ok) {
      try {
        size.b = std::stoull(token.substr(0, x));
        size.c = std::stoull(token.substr(x + 1));
        ok = size.b > 0 && size.c > 0;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      throw bnm::ValidationError("invalid size '" + token +
                                 "', expected BxC like 100x100");
    }
    sizes.push_back(size);
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return sizes;
}

struct MetricsArgs {
  std::string input;
  std::string out;
  std::size_t d = 0;
  bool no_validate = false;
};

void run_metrics(const MetricsArgs& args) {
  bnm::Matrix m = bnm::read_matrix_file(args.input);
  const bnm::PredictionMatrix pm = bnm::PredictionMatrix::from_rows(
      std::move(m), {.check_row_sums = !args.no_validate});
  const bnm::BoundsReport report = bnm::bounds_report(pm);
  const double fast = args.d == 0 ? report.fast_nuclear
                                  : bnm::fast_nuclear_norm(pm, args.d);

  OutputTarget out(args.out);
  out.stream() << "b,c,entropy,frobenius,nuclear,fast_nuclear,"
                  "predicted_categories,effective_rank,chain_ok\n"
               << pm.rows() << ',' << pm.cols() << ','
               << format_number(report.entropy) << ','
               << format_number(report.frobenius) << ','
               << format_number(report.nuclear) << ',' << format_number(fast)
               << ',' << bnm::predicted_category_count(pm) << ','
               << bnm::effective_rank(pm) << ','
               << (report.chain_ok ? "true" : "false") << '\n';
}

struct GradCheckArgs {
  std::string objective;
  std::string out;
  std::size_t b = 8;
  std::size_t c = 5;
  std::size_t d = 0;
  std::size_t probes = 20;
  // Balances the h^2 truncation error (worst for entropy at small entries)
  // against the eps/h round-off floor (worst for the norms); every objective
  // passes its tolerance with an order of magnitude to spare at this step.
  double step = 3e-6;
  std::uint64_t seed = 1;
};

// Tolerances pinned per objective; exceeding them is a numerical failure.
// The three first-order-smooth objectives share 1e-7; the nuclear norm gets
// 1e-5 because its gradient is only defined away from spectral ties.
double grad_check_tolerance(const std::string& objective) {
  static const std::map<std::string, double> kTolerances = {
      {"entropy", 1e-7},
      {"frobenius", 1e-7},
      {"nuclear", 1e-5},
      {"fast", 1e-7},
  };
  return kTolerances.at(objective);
}

int run_grad_check(const GradCheckArgs& args) {
  if (args.b == 0 || args.c < 2) {
    throw bnm::UsageError("need --b >= 1 and --c >= 2");
  }
  // Sharper rows (scaled logits) give the nuclear objective a cleanly
  // separated spectrum more often.
  const double logit_scale = args.objective == "nuclear" ? 2.0 : 1.0;
  constexpr double kSigmaGap = 0.05;
  constexpr std::size_t kMaxResamples = 200;

  bnm::Matrix matrix;
  std::size_t resampled = 0;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt >= kMaxResamples) {
      throw bnm::NumericalError(
          "no matrix with the required spectral gap found");
    }
    bnm::Rng rng(args.seed, attempt);
    bnm::Matrix logits(args.b, args.c);
    for (double& x : logits.data()) {
      x = logit_scale * rng.next_normal();
    }
    matrix = bnm::softmax_rows(logits);
    if (args.objective != "nuclear" || bnm::has_sigma_gap(matrix, kSigmaGap)) {
      resampled = attempt;
      break;
    }
  }

  std::size_t d_used = 0;
  bnm::GradientCheckReport report;
  if (args.objective == "entropy") {
    report = bnm::finite_diff_check(
        [](const bnm::Matrix& m) { return bnm::entropy_of(m); },
        [](const bnm::Matrix& m) { return bnm::entropy_grad(m); }, matrix,
        args.step, args.probes, args.seed);
  } else if (args.objective == "frobenius") {
    report = bnm::finite_diff_check(
        [](const bnm::Matrix& m) { return bnm::frobenius_norm_of(m); },
        [](const bnm::Matrix& m) { return bnm::frobenius_grad(m); }, matrix,
        args.step, args.probes, args.seed);
  } else if (args.objective == "nuclear") {
    report = bnm::finite_diff_check(
        [](const bnm::Matrix& m) { return bnm::nuclear_norm_of(m); },
        [](const bnm::Matrix& m) { return bnm::nuclear_grad(m); }, matrix,
        args.step, args.probes, args.seed);
  } else {  // "fast", enforced by the flag validator
    d_used = args.d == 0 ? std::min(args.b, args.c) : args.d;
    if (d_used > args.c || d_used == 0) {
      throw bnm::InvalidDError("component count " + std::to_string(d_used) +
                               " outside [1, " + std::to_string(args.c) + "]");
    }
    report = bnm::check_fast_nuclear_grad(matrix, d_used, args.step,
                                          args.probes, args.seed);
  }

  const double tolerance = grad_check_tolerance(args.objective);
  const bool pass = report.max_rel_error < tolerance;
  if (resampled > 0) {
    std::cerr << "note: input resampled " << resampled
              << " time(s) to satisfy the spectral-gap filter\n";
  }
  OutputTarget out(args.out);
  out.stream() << "objective,b,c,d,seed,probes,step,resampled,"
                  "max_rel_error,max_abs_error,tolerance,pass\n"
               << args.objective << ',' << args.b << ',' << args.c << ','
               << d_used << ',' << args.seed << ',' << report.probe_count
               << ',' << format_number(report.step) << ',' << resampled << ','
               << format_number(report.max_rel_error) << ','
               << format_number(report.max_abs_error) << ','
               << format_number(tolerance) << ',' << (pass ? "true" : "false")
               << '\n';
  if (!pass) {
    std::cerr << "gradient check failed: max_rel_error "
              << format_number(report.max_rel_error) << " >= tolerance "
              << format_number(tolerance) << '\n';
    return 3;
  }
  return 0;
}

struct SampleStatsArgs {
  std::string out;
  std::size_t c = 0;
  std::size_t b = 0;
  std::size_t trials = 100000;
  unsigned partitions = 1;
  std::uint64_t seed = 7;
  bool analytic = false;
};

void run_sample_stats(const SampleStatsArgs& args) {
  const bnm::OccupancyStats stats =
      args.analytic
          ? bnm::occupancy_analytic(args.c, args.b)
          : bnm::occupancy_monte_carlo(args.c, args.b, args.trials, args.seed,
                                       args.partitions);
  OutputTarget out(args.out);
  out.stream() << "c,b,trials,ratio_0,ratio_1,ratio_2,ratio_3plus\n"
               << stats.c << ',' << stats.b << ',' << stats.trials << ','
               << format_number(stats.ratio_0) << ','
               << format_number(stats.ratio_1) << ','
               << format_number(stats.ratio_2) << ','
               << format_number(stats.ratio_3plus) << '\n';
}

struct BenchArgs {
  std::string out;
  std::string sizes = "100x100,200x200,300x300";
  std::size_t repeats = 100;
  std::uint64_t seed = 7;
};

void run_bench_cmd(const BenchArgs& args) {
  if (args.repeats < 100) {
    std::cerr << "warning: fewer than 100 repeats gives unstable timings\n";
  }
  const std::vector<bnm::BenchSize> sizes = parse_sizes(args.sizes);
  const std::vector<bnm::BenchResult> results =
      bnm::run_bench(sizes, args.repeats, args.seed);
  OutputTarget out(args.out);
  out.stream() << "b,c,method,repeats,total_seconds\n";
  for (const bnm::BenchResult& r : results) {
    out.stream() << r.b << ',' << r.c << ',' << bnm::bench_method_name(r.method)
                 << ',' << r.repeats << ',' << format_number(r.total_seconds)
                 << '\n';
  }
}

struct TrainArgs {
  std::string out;
  std::string variant = "BNM";
  bool fast = false;
  double lambda = 0.5;
  double learning_rate = 0.1;
  std::size_t steps = 500;
  std::size_t batch_source = 36;
  std::size_t batch_target = 36;
  std::size_t k = 3;
  std::size_t d = 0;
  std::uint64_t seed = 42;
  bool legacy_norm = false;
  // dataset knobs
  std::size_t classes = 3;
  std::size_t dim = 5;
  std::size_t source_per_class = 200;
  std::size_t target_total = 300;
  std::string proportions = "0.7,0.2,0.1";
  double shift_magnitude = 1.0;
  double class_separation = 2.0;
  double noise = 0.5;
  std::uint64_t data_seed = 7;
};

bnm::TrainVariant parse_variant(const std::string& name, bool fast) {
  static const std::map<std::string, bnm::TrainVariant> kVariants = {
      {"EntMin", bnm::TrainVariant::kEntMin},
      {"BFM", bnm::TrainVariant::kBfm},
      {"BNM", bnm::TrainVariant::kBnm},
      {"BNM2", bnm::TrainVariant::kBnm2},
      {"FBNM", bnm::TrainVariant::kFbnm},
      {"FBNM2", bnm::TrainVariant::kFbnm2},
  };
  bnm::TrainVariant v = kVariants.at(name);
  if (!fast) {
    return v;
  }
  switch (v) {
    case bnm::TrainVariant::kBnm:
      return bnm::TrainVariant::kFbnm;
    case bnm::TrainVariant::kBnm2:
      return bnm::TrainVariant::kFbnm2;
    case bnm::TrainVariant::kFbnm:
    case bnm::TrainVariant::kFbnm2:
      return v;
    default:
      throw bnm::UsageError("--fast has no meaning for variant " + name);
  }
}

void run_train(const TrainArgs& args, const std::optional<double>& w_nuclear,
               const std::optional<double>& w_frobenius) {
  bnm::SyntheticConfig data_cfg;
  data_cfg.feature_dim = args.dim;
  data_cfg.categories = args.classes;
  data_cfg.source_per_class = args.source_per_class;
  data_cfg.target_total = args.target_total;
  data_cfg.target_proportions = parse_double_list(args.proportions);
  // Shift direction fixed along the all-ones diagonal, scaled so its
  // euclidean length equals the requested magnitude.
  data_cfg.domain_shift.assign(
      args.dim, args.shift_magnitude / std::sqrt(static_cast<double>(args.dim)));
  data_cfg.class_separation = args.class_separation;
  data_cfg.noise_sigma = args.noise;
  data_cfg.seed = args.data_seed;

  const bnm::Dataset data = bnm::generate_dataset(data_cfg);
  if (data.degenerate_geometry) {
    std::cerr << "warning: " << args.classes << " classes in " << args.dim
              << " dimensions cannot be mutually well separated\n";
  }

  bnm::TrainConfig train_cfg;
  train_cfg.variant = parse_variant(args.variant, args.fast);
  train_cfg.lambda = args.lambda;
  train_cfg.learning_rate = args.learning_rate;
  train_cfg.steps = args.steps;
  train_cfg.batch_source = args.batch_source;
  train_cfg.batch_target = args.batch_target;
  train_cfg.k = args.k;
  train_cfg.d = args.d;
  train_cfg.seed = args.seed;
  train_cfg.w_nuclear = w_nuclear;
  train_cfg.w_frobenius = w_frobenius;
  train_cfg.legacy_multibatch_norm = args.legacy_norm;

  const bnm::TrainResult result = bnm::train(
      bnm::SoftmaxClassifier::zeros(args.classes, args.dim), data, train_cfg);

  OutputTarget out(args.out);
  out.stream() << "step,src_entropy,tgt_entropy,diversity_ratio,accuracy,"
                  "cls,bnmax,bnmin,total\n";
  for (const bnm::TrainRecord& r : result.log) {
    out.stream() << r.step << ',' << format_number(r.source_entropy) << ','
                 << format_number(r.target_entropy) << ','
                 << format_number(r.diversity_ratio) << ','
                 << format_number(r.accuracy) << ',' << format_number(r.cls)
                 << ',' << format_number(r.bnmax) << ','
                 << format_number(r.bnmin) << ',' << format_number(r.total)
                 << '\n';
  }
  std::cerr << "final_accuracy=" << format_number(result.final_accuracy)
            << " final_diversity_ratio="
            << format_number(result.final_diversity_ratio) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch nuclear-norm objectives: metrics, gradients, sampling "
               "statistics, benchmarks and a synthetic two-domain trainer"};
  app.require_subcommand(1);

  MetricsArgs metrics_args;
  CLI::App* metrics = app.add_subcommand(
      "metrics", "Evaluate all measures of a prediction-matrix file");
  metrics->add_option("input", metrics_args.input, "matrix file")->required();
  metrics->add_option("--d", metrics_args.d,
                      "fast-norm component count (0 = min(B,C))");
  metrics->add_flag("--no-validate", metrics_args.no_validate,
                    "skip row-sum validation");
  metrics->add_option("--out", metrics_args.out, "write CSV to this file");

  GradCheckArgs grad_args;
  CLI::App* grad = app.add_subcommand(
      "grad-check", "Verify an analytic gradient against finite differences");
  grad->add_option("--objective", grad_args.objective, "objective to check")
      ->required()
      ->check(CLI::IsMember({"entropy", "frobenius", "nuclear", "fast"}));
  grad->add_option("--b", grad_args.b, "rows")->capture_default_str();
  grad->add_option("--c", grad_args.c, "columns")->capture_default_str();
  grad->add_option("--d", grad_args.d,
                   "fast-norm component count (0 = min(B,C))");
  grad->add_option("--probes", grad_args.probes, "probe entries")->capture_default_str();
  grad->add_option("--step", grad_args.step, "finite-difference step")->capture_default_str();
  grad->add_option("--seed", grad_args.seed, "RNG seed")->capture_default_str();
  grad->add_option("--out", grad_args.out, "write CSV to this file");

  SampleStatsArgs sample_args;
  CLI::App* sample = app.add_subcommand(
      "sample-stats", "Category occupancy of uniform with-replacement draws");
  sample->add_option("--c", sample_args.c, "category count")->required();
  sample->add_option("--b", sample_args.b, "draws per trial")->required();
  sample->add_option("--trials", sample_args.trials, "Monte Carlo trials")->capture_default_str();
  sample->add_option("--partitions", sample_args.partitions,
                     "worker partitions (result-invariant)")->capture_default_str();
  sample->add_flag("--analytic", sample_args.analytic,
                   "closed-form expectation instead of Monte Carlo");
  sample->add_option("--seed", sample_args.seed, "RNG seed")->capture_default_str();
  sample->add_option("--out", sample_args.out, "write CSV to this file");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand(
      "bench", "Time nuclear / entropy / fast-nuclear evaluations");
  bench->add_option("--sizes", bench_args.sizes,
                    "comma-separated BxC sizes")->capture_default_str();
  bench->add_option("--repeats", bench_args.repeats, "matrices per size")->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "RNG seed")->capture_default_str();
  bench->add_option("--out", bench_args.out, "write CSV to this file");

  TrainArgs train_args;
  double w_nuclear_value = 0.0;
  double w_frobenius_value = 0.0;
  CLI::App* train = app.add_subcommand(
      "train", "Train the synthetic two-domain softmax classifier");
  train->add_option("--variant", train_args.variant, "objective variant")->capture_default_str()
      ->check(CLI::IsMember({"EntMin", "BFM", "BNM", "BNM2", "FBNM", "FBNM2"}));
  train->add_flag("--fast", train_args.fast,
                  "use the fast norm (BNM->FBNM, BNM2->FBNM2)");
  train->add_option("--lambda", train_args.lambda, "trade-off weight")->capture_default_str();
  train->add_option("--lr", train_args.learning_rate, "learning rate")->capture_default_str();
  train->add_option("--steps", train_args.steps, "optimization steps")->capture_default_str();
  train->add_option("--batch-source", train_args.batch_source,
                    "source batch size")->capture_default_str();
  train->add_option("--batch-target", train_args.batch_target,
                    "target batch size")->capture_default_str();
  train->add_option("--k", train_args.k, "batches stacked per norm term")->capture_default_str();
  train->add_option("--d", train_args.d,
                    "fast-norm component count (0 = min(rows, cols))");
  train->add_option("--seed", train_args.seed, "training RNG seed")->capture_default_str();
  CLI::Option* opt_wn = train->add_option("--w-nuclear", w_nuclear_value,
                                          "trade-off nuclear weight");
  CLI::Option* opt_wf = train->add_option("--w-frobenius", w_frobenius_value,
                                          "trade-off Frobenius weight");
  train->add_flag("--legacy-multibatch-norm", train_args.legacy_norm,
                  "normalize stacked norms by the single-batch row count");
  train->add_option("--classes", train_args.classes, "category count")->capture_default_str();
  train->add_option("--dim", train_args.dim, "feature dimensions")->capture_default_str();
  train->add_option("--source-per-class", train_args.source_per_class,
                    "source samples per class")->capture_default_str();
  train->add_option("--target-total", train_args.target_total,
                    "total target samples")->capture_default_str();
  train->add_option("--proportions", train_args.proportions,
                    "target class proportions")->capture_default_str();
  train->add_option("--shift-magnitude", train_args.shift_magnitude,
                    "domain shift length")->capture_default_str();
  train->add_option("--class-sep", train_args.class_separation,
                    "class mean separation")->capture_default_str();
  train->add_option("--noise", train_args.noise, "feature noise sigma")->capture_default_str();
  train->add_option("--data-seed", train_args.data_seed, "dataset RNG seed")->capture_default_str();
  train->add_option("--out", train_args.out, "write CSV to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*metrics) {
      run_metrics(metrics_args);
    } else if (*grad) {
      return run_grad_check(grad_args);
    } else if (*sample) {
      run_sample_stats(sample_args);
    } else if (*bench) {
      run_bench_cmd(bench_args);
    } else if (*train) {
      run_train(train_args,
                opt_wn->count() > 0 ? std::optional<double>(w_nuclear_value)
                                    : std::nullopt,
                opt_wf->count() > 0 ? std::optional<double>(w_frobenius_value)
                                    : std::nullopt);
    }
  } catch (const bnm::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const bnm::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bnm::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
