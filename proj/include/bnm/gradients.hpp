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
#include <functional>

#include "bnm/matrix.hpp"

namespace bnm {

/// d(entropy)/dA with entries -(log a_ij + 1) / B. Every entry must be
/// strictly positive; throws ZeroEntryError otherwise.
Matrix entropy_grad(const Matrix& a);
Matrix entropy_grad(const PredictionMatrix& a);

/// d(||A||_F)/dA = A / ||A||_F. Throws ValidationError on a zero matrix.
Matrix frobenius_grad(const Matrix& a);
Matrix frobenius_grad(const PredictionMatrix& a);

/// Subgradient of the nuclear norm: U_r V_r^T over the retained (positive)
/// singular values. At full rank this is the exact gradient.
Matrix nuclear_grad(const Matrix& a);
Matrix nuclear_grad(const PredictionMatrix& a);

/// Gradient of the fast nuclear norm: column j of the result is A_:j / ||A_:j||
/// when j is among the d selected columns and zero otherwise. Throws
/// ZeroColumnError if a selected column has zero norm.
Matrix fast_nuclear_grad(const Matrix& a, std::size_t d);
Matrix fast_nuclear_grad(const PredictionMatrix& a, std::size_t d);

struct GradientCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t probe_count = 0;
  double step = 0.0;
};

using Objective = std::function<double(const Matrix&)>;
using GradientFn = std::function<Matrix(const Matrix&)>;
using ProbeFilter = std::function<bool(std::size_t i, std::size_t j)>;

/// Compares an analytic gradient against central differences
/// (f(A + hE) - f(A - hE)) / (2h) at `probes` seeded random entries.
/// Probes rejected by `admit` are re-drawn; throws ValidationError when no
/// admissible probe can be found. Relative error uses
/// |fd - an| / max(|fd|, |an|, 1e-12).
GradientCheckReport finite_diff_check(const Objective& objective,
                                      const GradientFn& analytic,
                                      const Matrix& a, double step,
                                      std::size_t probes, std::uint64_t seed,
                                      const ProbeFilter& admit = {});

/// Spectral-gap guard for nuclear-gradient checks: true when all consecutive
/// singular-value gaps and the smallest singular value exceed `gap`. Matrices
/// failing the guard are near a non-differentiable point and should be
/// re-sampled rather than checked.
bool has_sigma_gap(const Matrix& a, double gap);

/// finite_diff_check specialized to the fast nuclear norm: probes only touch
/// selected columns and are admitted only if the top-d column selection is
/// unchanged at A +/- h E (selection jumps make the objective piecewise and
/// the comparison meaningless).
GradientCheckReport check_fast_nuclear_grad(const Matrix& a, std::size_t d,
                                            double step, std::size_t probes,
                                            std::uint64_t seed);

}  // namespace bnm
