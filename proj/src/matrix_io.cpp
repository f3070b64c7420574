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

#include "bnm/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace bnm {
namespace {

// Strips ASCII whitespace from both ends.
std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\f\v");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r\f\v");
  return s.substr(b, e - b + 1);
}

double parse_value(const std::string& token, std::size_t line) {
  const std::string t = trim(token);
  if (t.empty()) {
    throw ParseError(line, "empty value");
  }
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + t.size()) {
    throw ParseError(line, "invalid number '" + t + "'");
  }
  return v;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      // A blank line is only tolerated as trailing whitespace at EOF.
      if (in.peek() != std::char_traits<char>::eof()) {
        throw ParseError(line_no, "blank line inside matrix");
      }
      break;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string token = comma == std::string::npos
                                    ? line.substr(start)
                                    : line.substr(start, comma - start);
      row.push_back(parse_value(token, line_no));
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw ParseError(line_no, "expected " + std::to_string(cols) +
                                    " values, got " +
                                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError(line_no == 0 ? 1 : line_no, "empty matrix file");
  }
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open '" + path + "'");
  }
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        out << ',';
      }
      out << format_number(m(i, j));
    }
    out << '\n';
  }
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace bnm
