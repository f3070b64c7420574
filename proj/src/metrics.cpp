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

#include "bnm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bnm/errors.hpp"
#include "bnm/svd.hpp"

namespace bnm {
namespace {

constexpr double kEntropyFloor = 1e-300;  // below this, x*log(x) counts as 0
constexpr double kChainRelTol = 1e-9;

void check_component_count(std::size_t d, std::size_t cols) {
  if (d < 1 || d > cols) {
    throw InvalidDError("component count " + std::to_string(d) +
                        " outside [1, " + std::to_string(cols) + "]");
  }
}

// a <= b within relative slack, scaled to the magnitudes involved.
bool leq_rel(double a, double b) {
  return a <= b + kChainRelTol * std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace

double entropy_of(const Matrix& a) {
  double sum = 0.0;
  for (double x : a.data()) {
    if (x > kEntropyFloor) {
      sum += x * std::log(x);
    }
  }
  // + 0.0 normalizes the one-hot case to +0 rather than -0 (the negation of
  // an exactly-zero sum), which would otherwise leak into printed output.
  return -sum / static_cast<double>(a.rows()) + 0.0;
}

double frobenius_norm_of(const Matrix& a) {
  double sum = 0.0;
  for (double x : a.data()) {
    sum += x * x;
  }
  return std::sqrt(sum);
}

double nuclear_norm_of(const Matrix& a) {
  const std::vector<double> sigma = singular_values(a);
  return std::accumulate(sigma.begin(), sigma.end(), 0.0);
}

double fast_nuclear_norm_of(const Matrix& a, std::size_t d) {
  check_component_count(d, a.cols());
  const std::vector<double> norms = column_norms_of(a);
  const std::vector<std::size_t> top = top_indices(norms, d);
  double sum = 0.0;
  for (std::size_t j : top) {
    sum += norms[j];
  }
  return sum;
}

double entropy(const PredictionMatrix& a) { return entropy_of(a.matrix()); }

double frobenius_norm(const PredictionMatrix& a) {
  return frobenius_norm_of(a.matrix());
}

double nuclear_norm(const PredictionMatrix& a) {
  return nuclear_norm_of(a.matrix());
}

double fast_nuclear_norm(const PredictionMatrix& a, std::size_t d) {
  return fast_nuclear_norm_of(a.matrix(), d);
}

double fast_nuclear_norm(const PredictionMatrix& a) {
  return fast_nuclear_norm_of(a.matrix(), std::min(a.rows(), a.cols()));
}

std::size_t predicted_category_count(const PredictionMatrix& a) {
  const std::vector<std::size_t> argmax = row_argmax(a.matrix());
  std::vector<bool> seen(a.cols(), false);
  std::size_t count = 0;
  for (std::size_t j : argmax) {
    if (!seen[j]) {
      seen[j] = true;
      ++count;
    }
  }
  return count;
}

double diversity_ratio(const PredictionMatrix& a,
                       std::size_t ground_truth_count) {
  if (ground_truth_count == 0) {
    throw ZeroGroundTruthError("ground-truth category count is zero");
  }
  return static_cast<double>(predicted_category_count(a)) /
         static_cast<double>(ground_truth_count);
}

std::size_t effective_rank(const PredictionMatrix& a) {
  const std::vector<double> sigma = singular_values(a);
  std::size_t rank = 0;
  for (double s : sigma) {
    if (s > 0.0) {
      ++rank;
    }
  }
  return rank;
}

BoundsReport bounds_report(const PredictionMatrix& a) {
  const double b = static_cast<double>(a.rows());
  const double c = static_cast<double>(a.cols());
  const double d = std::min(b, c);

  BoundsReport report;
  report.entropy = entropy(a);
  report.frobenius = frobenius_norm(a);
  report.nuclear = nuclear_norm(a);
  report.fast_nuclear = fast_nuclear_norm(a);
  report.f_lower = std::sqrt(b / c);
  report.f_upper = std::sqrt(b);
  report.nuclear_upper = std::sqrt(d * b);
  report.chain_ok = leq_rel(report.f_lower, report.frobenius) &&
                    leq_rel(report.frobenius, report.f_upper) &&
                    leq_rel(report.frobenius, report.nuclear) &&
                    leq_rel(report.nuclear, std::sqrt(d) * report.frobenius) &&
                    leq_rel(std::sqrt(d) * report.frobenius,
                            report.nuclear_upper) &&
                    leq_rel(report.nuclear / std::sqrt(d), report.frobenius);
  return report;
}

double weighted_norm_objective(const PredictionMatrix& a, double w_nuclear,
                               double w_frobenius) {
  return w_nuclear * nuclear_norm(a) + w_frobenius * frobenius_norm(a);
}

std::vector<double> column_norms_of(const Matrix& a) {
  std::vector<double> sums(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      sums[j] += x * x;
    }
  }
  for (double& s : sums) {
    s = std::sqrt(s);
  }
  return sums;
}

std::vector<std::size_t> top_indices(const std::vector<double>& values,
                                     std::size_t d) {
  check_component_count(d, values.size());
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] > values[b];
                   });
  order.resize(d);
  return order;
}

std::vector<std::size_t> row_argmax(const Matrix& a) {
  std::vector<std::size_t> result(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < a.cols(); ++j) {
      if (a(i, j) > a(i, best)) {
        best = j;
      }
    }
    result[i] = best;
  }
  return result;
}

}  // namespace bnm
