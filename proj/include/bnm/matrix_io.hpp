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

#include <iosfwd>
#include <string>

#include "bnm/matrix.hpp"

namespace bnm {

/// Parses the plain matrix file format: one row per line, comma-separated
/// decimal numbers, no header. Ragged or malformed rows raise ParseError with
/// the offending 1-based line number.
Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);

/// Writes a matrix in the same format, 6 significant digits per entry.
void write_matrix(std::ostream& out, const Matrix& m);

/// Formats one number with 6 significant digits (the CSV report convention).
std::string format_number(double value);

}  // namespace bnm
