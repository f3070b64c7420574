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

#include "bnm/svd.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bnm/errors.hpp"

namespace bnm {
namespace {

constexpr int kMaxSweeps = 60;
// Relative pair-orthogonality target. The effective threshold is floored at
// 2*m*eps so it cannot drop below the rounding noise of an m-term dot product.
constexpr double kPairTolerance = 1e-12;

// Working state for one-sided Jacobi: w holds the columns being
// orthogonalized (column-major, m x n with n <= m), v accumulates the right
// rotations when a full decomposition is requested, norms2 tracks exact
// squared column norms (refreshed inside every rotation).
struct JacobiState {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> w;
  std::vector<double> v;
  std::vector<double> norms2;
};

double column_dot(const double* a, const double* b, std::size_t m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    s += a[i] * b[i];
  }
  return s;
}

// One plane rotation on columns p and q chosen to zero their inner product.
// Returns the updated exact squared norms through the state.
void rotate_pair(JacobiState& st, std::size_t p, std::size_t q, double alpha,
                 double beta, double gamma, bool want_v) {
  const double zeta = (beta - alpha) / (2.0 * gamma);
  const double sign = zeta < 0.0 ? -1.0 : 1.0;
  const double t = sign / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = c * t;

  double* wp = st.w.data() + p * st.m;
  double* wq = st.w.data() + q * st.m;
  double np = 0.0;
  double nq = 0.0;
  for (std::size_t i = 0; i < st.m; ++i) {
    const double fp = wp[i];
    const double fq = wq[i];
    const double rp = c * fp - s * fq;
    const double rq = s * fp + c * fq;
    wp[i] = rp;
    wq[i] = rq;
    np += rp * rp;
    nq += rq * rq;
  }
  st.norms2[p] = np;
  st.norms2[q] = nq;

  if (want_v) {
    double* vp = st.v.data() + p * st.n;
    double* vq = st.v.data() + q * st.n;
    for (std::size_t i = 0; i < st.n; ++i) {
      const double fp = vp[i];
      const double fq = vq[i];
      vp[i] = c * fp - s * fq;
      vq[i] = s * fp + c * fq;
    }
  }
}

// Cyclic sweeps in fixed ascending (p, q) order until a full sweep performs
// no rotation. Deterministic by construction.
void jacobi_orthogonalize(JacobiState& st, bool want_v, std::size_t a_rows,
                          std::size_t a_cols) {
  const double tol =
      std::max(kPairTolerance, 2.0 * static_cast<double>(st.m) * DBL_EPSILON);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    // A column whose norm has decayed to rounding noise relative to the
    // largest column is numerically zero, but its leftover bits still point
    // in an essentially random direction, so pair ratios stay O(1) and the
    // norm would keep shrinking through the subnormal range without ever
    // reaching zero. Snap such columns to exact zero; anything this small is
    // below the singular-value clamp anyway.
    const double floor2 =
        *std::max_element(st.norms2.begin(), st.norms2.end()) *
        (DBL_EPSILON * DBL_EPSILON);
    for (std::size_t j = 0; j < st.n; ++j) {
      if (st.norms2[j] != 0.0 && st.norms2[j] <= floor2) {
        std::fill_n(st.w.begin() + static_cast<std::ptrdiff_t>(j * st.m),
                    st.m, 0.0);
        st.norms2[j] = 0.0;
      }
    }
    for (std::size_t p = 0; p + 1 < st.n; ++p) {
      for (std::size_t q = p + 1; q < st.n; ++q) {
        const double alpha = st.norms2[p];
        const double beta = st.norms2[q];
        if (alpha == 0.0 || beta == 0.0) {
          continue;
        }
        const double gamma =
            column_dot(st.w.data() + p * st.m, st.w.data() + q * st.m, st.m);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotate_pair(st, p, q, alpha, beta, gamma, want_v);
        rotated = true;
      }
    }
    if (!rotated) {
      return;
    }
  }
  throw ConvergenceError("jacobi svd did not converge within " +
                         std::to_string(kMaxSweeps) + " sweeps for a " +
                         std::to_string(a_rows) + "x" +
                         std::to_string(a_cols) + " matrix");
}

// Loads the matrix (or its transpose, whichever has fewer columns) into
// column-major working storage. Returns true if the transpose was taken.
bool load_working_columns(const Matrix& a, JacobiState& st, bool want_v) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw EmptyMatrixError("svd of an empty matrix");
  }
  for (double x : a.data()) {
    if (!std::isfinite(x)) {
      throw NonFiniteInputError("svd input contains a non-finite entry");
    }
  }
  const bool transposed = a.cols() > a.rows();
  st.m = transposed ? a.cols() : a.rows();
  st.n = transposed ? a.rows() : a.cols();
  st.w.assign(st.m * st.n, 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (transposed) {
        st.w[i * st.m + j] = a(i, j);  // column i of w holds row i of a
      } else {
        st.w[j * st.m + i] = a(i, j);
      }
    }
  }
  st.norms2.assign(st.n, 0.0);
  for (std::size_t j = 0; j < st.n; ++j) {
    st.norms2[j] = column_dot(st.w.data() + j * st.m, st.w.data() + j * st.m,
                              st.m);
  }
  if (want_v) {
    st.v.assign(st.n * st.n, 0.0);
    for (std::size_t j = 0; j < st.n; ++j) {
      st.v[j * st.n + j] = 1.0;
    }
  }
  return transposed;
}

// Column order by descending singular value; ties keep the lower original
// index first so the result is deterministic.
std::vector<std::size_t> sorted_order(const std::vector<double>& norms2) {
  std::vector<std::size_t> order(norms2.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return norms2[a] > norms2[b];
                   });
  return order;
}

// Fills the columns of u listed in `missing` with an orthonormal basis of a
// complement subspace: standard basis vectors are orthogonalized against all
// existing columns (two passes) and accepted when enough mass survives.
void complete_orthonormal(std::vector<double>& u, std::size_t m,
                          std::size_t n_cols,
                          const std::vector<std::size_t>& missing) {
  std::vector<bool> filled(n_cols, true);
  for (std::size_t j : missing) {
    filled[j] = false;
  }
  std::size_t next_basis = 0;
  for (std::size_t slot : missing) {
    bool accepted = false;
    for (; next_basis < m && !accepted; ++next_basis) {
      std::vector<double> cand(m, 0.0);
      cand[next_basis] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < n_cols; ++j) {
          if (!filled[j]) {
            continue;
          }
          const double* uj = u.data() + j * m;
          const double proj = column_dot(cand.data(), uj, m);
          for (std::size_t i = 0; i < m; ++i) {
            cand[i] -= proj * uj[i];
          }
        }
      }
      const double norm =
          std::sqrt(column_dot(cand.data(), cand.data(), m));
      if (norm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) {
          u[slot * m + i] = cand[i] / norm;
        }
        filled[slot] = true;
        accepted = true;
      }
    }
    if (!accepted) {
      throw NumericalError("orthonormal completion of the left factor failed");
    }
  }
}

Matrix from_columns(const std::vector<double>& cols, std::size_t m,
                    std::size_t n) {
  Matrix out(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      out(i, j) = cols[j * m + i];
    }
  }
  return out;
}

}  // namespace

double singular_value_clamp(std::size_t rows, std::size_t cols,
                            double sigma_max) {
  return DBL_EPSILON * static_cast<double>(std::max(rows, cols)) * sigma_max;
}

std::vector<double> singular_values(const Matrix& a) {
  JacobiState st;
  load_working_columns(a, st, /*want_v=*/false);
  jacobi_orthogonalize(st, /*want_v=*/false, a.rows(), a.cols());
  std::vector<double> sigma(st.n);
  for (std::size_t j = 0; j < st.n; ++j) {
    sigma[j] = std::sqrt(st.norms2[j]);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  const double tau = singular_value_clamp(a.rows(), a.cols(), sigma.front());
  for (double& s : sigma) {
    if (s < tau) {
      s = 0.0;
    }
  }
  return sigma;
}

std::vector<double> singular_values(const PredictionMatrix& a) {
  return singular_values(a.matrix());
}

SvdResult svd(const Matrix& a) {
  JacobiState st;
  const bool transposed = load_working_columns(a, st, /*want_v=*/true);
  jacobi_orthogonalize(st, /*want_v=*/true, a.rows(), a.cols());

  const std::vector<std::size_t> order = sorted_order(st.norms2);
  std::vector<double> sigma(st.n);
  for (std::size_t j = 0; j < st.n; ++j) {
    sigma[j] = std::sqrt(st.norms2[order[j]]);
  }
  const double tau = singular_value_clamp(a.rows(), a.cols(), sigma.front());

  // u: normalized working columns for retained values; completion otherwise.
  std::vector<double> u(st.m * st.n, 0.0);
  std::vector<double> v(st.n * st.n, 0.0);
  std::vector<std::size_t> missing;
  for (std::size_t j = 0; j < st.n; ++j) {
    const std::size_t src = order[j];
    for (std::size_t i = 0; i < st.n; ++i) {
      v[j * st.n + i] = st.v[src * st.n + i];
    }
    if (sigma[j] < tau || sigma[j] == 0.0) {
      sigma[j] = 0.0;
      missing.push_back(j);
      continue;
    }
    const double* wj = st.w.data() + src * st.m;
    for (std::size_t i = 0; i < st.m; ++i) {
      u[j * st.m + i] = wj[i] / sigma[j];
    }
  }
  complete_orthonormal(u, st.m, st.n, missing);

  SvdResult result;
  result.singular_values = std::move(sigma);
  if (transposed) {
    // a^T = u sigma v^T, so a = v sigma u^T.
    result.left = from_columns(v, st.n, st.n);
    result.right = from_columns(u, st.m, st.n);
  } else {
    result.left = from_columns(u, st.m, st.n);
    result.right = from_columns(v, st.n, st.n);
  }
  return result;
}

SvdResult svd(const PredictionMatrix& a) { return svd(a.matrix()); }

}  // namespace bnm
