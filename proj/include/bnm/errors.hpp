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
#include <stdexcept>
#include <string>

namespace bnm {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input data. Mapped to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Interface misuse (bad argument combinations). Mapped to CLI exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Runtime numerical failure (non-convergence, divergence, overflow).
/// Mapped to CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NegativeEntryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RowSumError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyMatrixError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonFiniteInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ColumnMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyListError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An exactly-zero entry where a positive probability is required
/// (e.g. entropy gradients).
class ZeroEntryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Zero predicted probability at a labeled position in the classification loss.
class ZeroProbabilityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A column with zero norm was selected by the fast-norm column picker.
class ZeroColumnError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Ground-truth category count of zero in a diversity ratio.
class ZeroGroundTruthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Too few data points for a fit (e.g. fewer than three sizes for a
/// scaling-exponent regression).
class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Input file rejected during parsing; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Component count d outside [1, C].
class InvalidDError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Iterative decomposition did not converge within its sweep budget.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalOverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Training produced a non-finite loss; carries the offending step index.
class NonFiniteLossError : public NumericalError {
 public:
  explicit NonFiniteLossError(std::size_t step)
      : NumericalError("non-finite loss at step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace bnm
