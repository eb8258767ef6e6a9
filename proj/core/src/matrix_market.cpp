// Copyright 2026 The kaczmarz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kaczmarz/matrix_market.hpp"

#include <cmath>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kaczmarz/errors.hpp"

namespace kaczmarz {
namespace {

enum class Symmetry { kGeneral, kSymmetric, kSkewSymmetric };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next line that is neither a comment nor blank; false at end of input.
  bool next_data(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] == '%') continue;
      if (blank(line)) continue;
      return true;
    }
    return false;
  }
  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  std::size_t number() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

double parse_real(const std::string& token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token[0] == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError(line, "invalid number '" + token + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value '" + token + "'");
  return v;
}

std::size_t parse_count(const std::string& token, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + token + "'");
  }
  return v;
}

}  // namespace

DenseMatrix read_matrix_market(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next_raw(line)) throw ParseError(1, "empty input");
  const auto header = tokens(line);
  if (header.size() != 5 || lower(header[0]) != "%%matrixmarket") {
    throw ParseError(reader.number(), "missing %%MatrixMarket banner");
  }
  if (lower(header[1]) != "matrix") {
    throw ParseError(reader.number(), "object '" + header[1] + "' is not 'matrix'");
  }
  const std::string format = lower(header[2]);
  const std::string field = lower(header[3]);
  const std::string symmetry_name = lower(header[4]);
  if (format != "coordinate" && format != "array") {
    throw ParseError(reader.number(), "unknown format '" + header[2] + "'");
  }
  if (field == "complex" || field == "pattern") {
    throw Error(ErrorCode::kUnsupportedField,
                "field '" + header[3] + "' is not supported; need real values");
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw ParseError(reader.number(), "unknown field '" + header[3] + "'");
  }
  Symmetry symmetry = Symmetry::kGeneral;
  if (symmetry_name == "symmetric") {
    symmetry = Symmetry::kSymmetric;
  } else if (symmetry_name == "skew-symmetric") {
    symmetry = Symmetry::kSkewSymmetric;
  } else if (symmetry_name == "hermitian") {
    throw Error(ErrorCode::kUnsupportedField, "hermitian storage needs a complex field");
  } else if (symmetry_name != "general") {
    throw ParseError(reader.number(), "unknown symmetry '" + header[4] + "'");
  }

  if (!reader.next_data(line)) throw ParseError(reader.number(), "missing size line");
  const auto size = tokens(line);
  const bool coordinate = format == "coordinate";
  if (size.size() != (coordinate ? 3u : 2u)) {
    throw ParseError(reader.number(), "size line needs " +
                                          std::string(coordinate ? "3" : "2") + " integers");
  }
  const std::size_t m = parse_count(size[0], reader.number(), "row count");
  const std::size_t n = parse_count(size[1], reader.number(), "column count");
  if (m == 0 || n == 0) throw ParseError(reader.number(), "matrix dimensions must be positive");
  if (symmetry != Symmetry::kGeneral && m != n) {
    throw ParseError(reader.number(), "symmetric storage requires a square matrix");
  }

  Matrix values = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const auto put = [&](std::size_t i, std::size_t j, double v) {
    values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
    if (i != j && symmetry == Symmetry::kSymmetric) {
      values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += v;
    } else if (i != j && symmetry == Symmetry::kSkewSymmetric) {
      values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) -= v;
    }
  };

  if (coordinate) {
    const std::size_t nnz = parse_count(size[2], reader.number(), "entry count");
    for (std::size_t e = 0; e < nnz; ++e) {
      if (!reader.next_data(line)) {
        throw ParseError(reader.number(), "expected " + std::to_string(nnz) + " entries, got " +
                                              std::to_string(e));
      }
      const auto t = tokens(line);
      if (t.size() != 3) throw ParseError(reader.number(), "entry needs 'row col value'");
      const std::size_t i = parse_count(t[0], reader.number(), "row index");
      const std::size_t j = parse_count(t[1], reader.number(), "column index");
      if (i < 1 || i > m || j < 1 || j > n) {
        throw ParseError(reader.number(), "index (" + t[0] + ", " + t[1] + ") out of range");
      }
      if (symmetry != Symmetry::kGeneral && j > i) {
        throw ParseError(reader.number(), "symmetric storage lists the lower triangle only");
      }
      put(i - 1, j - 1, parse_real(t[2], reader.number()));
    }
  } else {
    // Column-major; symmetric storage lists the lower triangle by columns
    // and skew-symmetric storage omits the diagonal.
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t first_row = 0;
      if (symmetry == Symmetry::kSymmetric) first_row = j;
      if (symmetry == Symmetry::kSkewSymmetric) first_row = j + 1;
      for (std::size_t i = first_row; i < m; ++i) {
        if (!reader.next_data(line)) throw ParseError(reader.number(), "too few array entries");
        const auto t = tokens(line);
        if (t.size() != 1) throw ParseError(reader.number(), "array entry needs one value");
        put(i, j, parse_real(t[0], reader.number()));
      }
    }
  }
  if (reader.next_data(line)) throw ParseError(reader.number(), "unexpected trailing data");
  return DenseMatrix(std::move(values));
}

DenseMatrix load_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileError, "cannot open " + path.string());
  return read_matrix_market(in);
}

namespace {
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
}  // namespace

void write_matrix_market(std::ostream& out, const DenseMatrix& a, MarketFormat format) {
  const Matrix& v = a.values();
  if (format == MarketFormat::kArray) {
    out << "%%MatrixMarket matrix array real general\n" << a.rows() << ' ' << a.cols() << '\n';
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) out << shortest(v(i, j)) << '\n';
    }
    return;
  }
  std::size_t nnz = 0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) nnz += v(i, j) != 0.0;
  }
  out << "%%MatrixMarket matrix coordinate real general\n"
      << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (v(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << shortest(v(i, j)) << '\n';
    }
  }
}

void save_matrix_market(const std::filesystem::path& path, const DenseMatrix& a,
                        MarketFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_matrix_market(out, a, format);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace kaczmarz
