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
#include <initializer_list>
#include <span>
#include <vector>

#include "bnm/errors.hpp"

namespace bnm {

/// Dense row-major matrix of doubles. Plain storage, no validation.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}
  /// Construction from a nested list; throws DimensionMismatchError on
  /// ragged rows.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;

  /// Exact (bitwise) equality; used by determinism tests.
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Validation knobs for PredictionMatrix::from_rows. The row-sum check can be
/// relaxed for externally produced data; nonnegativity is always enforced.
struct ValidateOptions {
  bool check_row_sums = true;
};

/// A batch prediction matrix: B x C with entries in [0, 1] and rows summing
/// to 1 within tolerance. B >= 1 and C >= 2. Entries within kNegativeTolerance
/// below zero are clamped to exactly 0 on construction so downstream
/// x*log(x) terms stay well defined.
class PredictionMatrix {
 public:
  static constexpr double kNegativeTolerance = 1e-9;
  static constexpr double kRowSumTolerance = 1e-6;

  /// Validates and takes ownership of `values`. Throws EmptyMatrixError,
  /// NonFiniteInputError, NegativeEntryError or RowSumError.
  static PredictionMatrix from_rows(Matrix values, ValidateOptions options = {});

  std::size_t rows() const noexcept { return values_.rows(); }  // B
  std::size_t cols() const noexcept { return values_.cols(); }  // C
  const Matrix& matrix() const noexcept { return values_; }

  friend bool operator==(const PredictionMatrix& a, const PredictionMatrix& b) {
    return a.values_ == b.values_;
  }

 private:
  friend PredictionMatrix stack(std::span<const PredictionMatrix> batches);
  explicit PredictionMatrix(Matrix values) : values_(std::move(values)) {}

  Matrix values_;
};

/// Row-wise softmax kernel with per-row max subtraction. Throws
/// NonFiniteInputError if any logit is NaN or infinite.
Matrix softmax_rows(const Matrix& logits);

/// softmax_rows followed by prediction-matrix validation.
PredictionMatrix softmax(const Matrix& logits);

/// Concatenates batches along rows, preserving order. Throws EmptyListError
/// for an empty list and ColumnMismatchError on differing column counts.
PredictionMatrix stack(std::span<const PredictionMatrix> batches);

}  // namespace bnm
