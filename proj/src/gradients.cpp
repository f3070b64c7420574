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

#include "bnm/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bnm/errors.hpp"
#include "bnm/metrics.hpp"
#include "bnm/rng.hpp"
#include "bnm/svd.hpp"

namespace bnm {
namespace {

constexpr double kRelFloor = 1e-12;

}  // namespace

Matrix entropy_grad(const Matrix& a) {
  const double inv_b = 1.0 / static_cast<double>(a.rows());
  Matrix g(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      if (x <= 0.0) {
        throw ZeroEntryError("entropy gradient undefined at zero entry (" +
                             std::to_string(i) + ", " + std::to_string(j) +
                             ")");
      }
      g(i, j) = -inv_b * (std::log(x) + 1.0);
    }
  }
  return g;
}

Matrix entropy_grad(const PredictionMatrix& a) {
  return entropy_grad(a.matrix());
}

Matrix frobenius_grad(const Matrix& a) {
  const double norm = frobenius_norm_of(a);
  if (norm == 0.0) {
    throw ValidationError("frobenius gradient undefined for a zero matrix");
  }
  Matrix g(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      g(i, j) = a(i, j) / norm;
    }
  }
  return g;
}

Matrix frobenius_grad(const PredictionMatrix& a) {
  return frobenius_grad(a.matrix());
}

Matrix nuclear_grad(const Matrix& a) {
  const SvdResult decomposition = svd(a);
  const std::size_t d = decomposition.singular_values.size();
  Matrix g(a.rows(), a.cols());
  // G = sum over retained components of u_k v_k^T; clamped values drop out.
  for (std::size_t k = 0; k < d; ++k) {
    if (decomposition.singular_values[k] == 0.0) {
      break;  // sorted descending, the rest are clamped too
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double u = decomposition.left(i, k);
      for (std::size_t j = 0; j < a.cols(); ++j) {
        g(i, j) += u * decomposition.right(j, k);
      }
    }
  }
  return g;
}

Matrix nuclear_grad(const PredictionMatrix& a) {
  return nuclear_grad(a.matrix());
}

Matrix fast_nuclear_grad(const Matrix& a, std::size_t d) {
  const std::vector<double> norms = column_norms_of(a);
  const std::vector<std::size_t> top = top_indices(norms, d);
  Matrix g(a.rows(), a.cols());
  for (std::size_t j : top) {
    if (norms[j] == 0.0) {
      throw ZeroColumnError("selected column " + std::to_string(j) +
                            " has zero norm");
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
      g(i, j) = a(i, j) / norms[j];
    }
  }
  return g;
}

Matrix fast_nuclear_grad(const PredictionMatrix& a, std::size_t d) {
  return fast_nuclear_grad(a.matrix(), d);
}

GradientCheckReport finite_diff_check(const Objective& objective,
                                      const GradientFn& analytic,
                                      const Matrix& a, double step,
                                      std::size_t probes, std::uint64_t seed,
                                      const ProbeFilter& admit) {
  if (a.empty()) {
    throw EmptyMatrixError("gradient check on an empty matrix");
  }
  const Matrix grad = analytic(a);
  Rng rng(seed);
  GradientCheckReport report;
  report.step = step;

  const std::size_t max_attempts = 1000 * std::max<std::size_t>(probes, 1);
  std::size_t attempts = 0;
  while (report.probe_count < probes) {
    if (++attempts > max_attempts) {
      throw ValidationError("no admissible probe entries found");
    }
    const std::size_t i = rng.next_below(a.rows());
    const std::size_t j = rng.next_below(a.cols());
    if (admit && !admit(i, j)) {
      continue;
    }
    Matrix plus = a;
    Matrix minus = a;
    plus(i, j) += step;
    minus(i, j) -= step;
    const double fd = (objective(plus) - objective(minus)) / (2.0 * step);
    const double an = grad(i, j);
    const double abs_err = std::abs(fd - an);
    const double rel_err =
        abs_err / std::max({std::abs(fd), std::abs(an), kRelFloor});
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    report.max_rel_error = std::max(report.max_rel_error, rel_err);
    ++report.probe_count;
  }
  return report;
}

bool has_sigma_gap(const Matrix& a, double gap) {
  const std::vector<double> sigma = singular_values(a);
  for (std::size_t k = 0; k + 1 < sigma.size(); ++k) {
    if (sigma[k] - sigma[k + 1] <= gap) {
      return false;
    }
  }
  return sigma.back() > gap;
}

GradientCheckReport check_fast_nuclear_grad(const Matrix& a, std::size_t d,
                                            double step, std::size_t probes,
                                            std::uint64_t seed) {
  const std::vector<double> norms = column_norms_of(a);
  const std::vector<std::size_t> top = top_indices(norms, d);
  std::vector<bool> selected(a.cols(), false);
  for (std::size_t j : top) {
    selected[j] = true;
  }
  // Admit a probe only when perturbing that entry by +/- step cannot change
  // which columns are selected; otherwise the objective is not smooth there.
  const auto stable = [&](std::size_t i, std::size_t j) {
    if (!selected[j]) {
      return false;
    }
    for (const double delta : {step, -step}) {
      Matrix perturbed = a;
      perturbed(i, j) += delta;
      const std::vector<std::size_t> new_top =
          top_indices(column_norms_of(perturbed), d);
      for (std::size_t k : new_top) {
        if (!selected[k]) {
          return false;
        }
      }
    }
    return true;
  };
  return finite_diff_check(
      [d](const Matrix& m) { return fast_nuclear_norm_of(m, d); },
      [d](const Matrix& m) { return fast_nuclear_grad(m, d); }, a, step,
      probes, seed, stable);
}

}  // namespace bnm
