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

#include "bnm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bnm {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw DimensionMismatchError("ragged initializer: expected " +
                                   std::to_string(cols_) + " columns, got " +
                                   std::to_string(row.size()));
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      t(j, i) = (*this)(i, j);
    }
  }
  return t;
}

PredictionMatrix PredictionMatrix::from_rows(Matrix values,
                                             ValidateOptions options) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw EmptyMatrixError("prediction matrix must be non-empty");
  }
  if (values.cols() < 2) {
    throw ValidationError("prediction matrix needs at least 2 categories, got " +
                          std::to_string(values.cols()));
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < values.cols(); ++j) {
      double& v = values(i, j);
      if (!std::isfinite(v)) {
        throw NonFiniteInputError("non-finite entry at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
      }
      if (v < 0.0) {
        if (v < -kNegativeTolerance) {
          throw NegativeEntryError("entry (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ") = " +
                                   std::to_string(v) + " is negative");
        }
        v = 0.0;  // rounding noise; clamp so 0*log(0) stays defined
      }
      sum += v;
    }
    if (options.check_row_sums && std::abs(sum - 1.0) > kRowSumTolerance) {
      throw RowSumError("row " + std::to_string(i) + " sums to " +
                        std::to_string(sum) + ", expected 1");
    }
  }
  return PredictionMatrix(std::move(values));
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double max_logit = -HUGE_VAL;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      const double z = logits(i, j);
      if (!std::isfinite(z)) {
        throw NonFiniteInputError("non-finite logit at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
      }
      max_logit = std::max(max_logit, z);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      const double e = std::exp(logits(i, j) - max_logit);
      out(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      out(i, j) /= sum;
    }
  }
  return out;
}

PredictionMatrix softmax(const Matrix& logits) {
  return PredictionMatrix::from_rows(softmax_rows(logits));
}

PredictionMatrix stack(std::span<const PredictionMatrix> batches) {
  if (batches.empty()) {
    throw EmptyListError("cannot stack an empty list of batches");
  }
  const std::size_t cols = batches.front().cols();
  std::size_t rows = 0;
  for (const PredictionMatrix& b : batches) {
    if (b.cols() != cols) {
      throw ColumnMismatchError("stacked batches must share the category "
                                "count: got " + std::to_string(b.cols()) +
                                " and " + std::to_string(cols));
    }
    rows += b.rows();
  }
  Matrix stacked(rows, cols);
  std::size_t offset = 0;
  for (const PredictionMatrix& b : batches) {
    std::copy(b.matrix().data().begin(), b.matrix().data().end(),
              stacked.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += b.rows() * cols;
  }
  return PredictionMatrix(std::move(stacked));
}

}  // namespace bnm
