#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bmf/linear_operator.hpp"
#include "bmf/types.hpp"

namespace bmf {

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, std::size_t line_no, const char* path) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(std::string(path) + ":" + std::to_string(line_no) +
                     ": bad numeric token '" + std::string(tok) + "'");
  }
  return v;
}

inline long parse_long(std::string_view tok, std::size_t line_no, const char* path) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(std::string(path) + ":" + std::to_string(line_no) +
                     ": bad integer token '" + std::string(tok) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

}  // namespace detail

/**
 * @brief Parsed Matrix Market content (coordinate or array, real or complex,
 *        general/symmetric/hermitian/skew-symmetric).
 *
 * Symmetric storage is expanded on read. Coordinate files keep a sparse
 * triplet list alongside nothing else; as_dense()/as_operator() materialize
 * the desired view.
 */
struct MarketMatrix {
  Index rows = 0;
  Index cols = 0;
  bool coordinate = false;
  std::vector<Index> coo_i, coo_j;
  std::vector<Complex> coo_v;
  Matrix dense;  // filled for array files

  Matrix as_dense() const {
    if (!coordinate) return dense;
    Matrix m = Matrix::Zero(rows, cols);
    for (std::size_t t = 0; t < coo_v.size(); ++t) m(coo_i[t], coo_j[t]) += coo_v[t];
    return m;
  }

  LinearOperator as_operator() const {
    if (rows != cols) {
      throw DimensionMismatchError("matrix market: operator requires a square matrix");
    }
    if (!coordinate) return LinearOperator::dense(dense);
    SparseCsr csr;
    csr.n = rows;
    std::vector<Index> count(static_cast<std::size_t>(rows) + 1, 0);
    for (auto i : coo_i) ++count[static_cast<std::size_t>(i) + 1];
    for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
    csr.row_ptr = count;
    csr.col_idx.resize(coo_v.size());
    csr.values.resize(coo_v.size());
    std::vector<Index> cursor(csr.row_ptr.begin(), csr.row_ptr.end());
    for (std::size_t t = 0; t < coo_v.size(); ++t) {
      Index p = cursor[static_cast<std::size_t>(coo_i[t])]++;
      csr.col_idx[static_cast<std::size_t>(p)] = coo_j[t];
      csr.values[static_cast<std::size_t>(p)] = coo_v[t];
    }
    return LinearOperator::sparse(std::move(csr));
  }

  Vector as_vector() const {
    Matrix m = as_dense();
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw DimensionMismatchError("matrix market: expected a vector (one row or column)");
  }
};

/**
 * @brief Read a Matrix Market file.
 *
 * Raises ParseError with the offending line number on malformed input and
 * DimensionMismatchError on out-of-range indices.
 */
inline MarketMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  ++line_no;
  auto head = detail::split_ws(line);
  if (head.size() < 4 || detail::lower(head[0]) != "%%matrixmarket" ||
      detail::lower(head[1]) != "matrix") {
    throw ParseError(path + ":1: not a Matrix Market matrix header");
  }
  std::string format = detail::lower(head[2]);
  std::string field = head.size() > 3 ? detail::lower(head[3]) : "real";
  std::string symmetry = head.size() > 4 ? detail::lower(head[4]) : "general";
  if (format != "coordinate" && format != "array") {
    throw ParseError(path + ":1: unsupported format '" + format + "'");
  }
  if (field != "real" && field != "complex" && field != "integer") {
    throw ParseError(path + ":1: unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "hermitian" &&
      symmetry != "skew-symmetric") {
    throw ParseError(path + ":1: unsupported symmetry '" + symmetry + "'");
  }
  const bool complex_field = field == "complex";

  auto next_data_line = [&](std::vector<std::string_view>& toks, std::string& storage) -> bool {
    while (std::getline(in, storage)) {
      ++line_no;
      if (!storage.empty() && storage[0] == '%') continue;
      toks = detail::split_ws(storage);
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string_view> toks;
  std::string storage;
  if (!next_data_line(toks, storage)) throw ParseError(path + ": missing size line");

  MarketMatrix mm;
  mm.coordinate = format == "coordinate";

  auto mirror = [&](Complex v) -> Complex {
    if (symmetry == "symmetric") return v;
    if (symmetry == "hermitian") return std::conj(v);
    return -v;  // skew-symmetric
  };

  if (mm.coordinate) {
    if (toks.size() != 3) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'rows cols nnz'");
    mm.rows = detail::parse_long(toks[0], line_no, path.c_str());
    mm.cols = detail::parse_long(toks[1], line_no, path.c_str());
    long nnz = detail::parse_long(toks[2], line_no, path.c_str());
    if (mm.rows <= 0 || mm.cols <= 0 || nnz < 0) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad sizes");
    }
    for (long t = 0; t < nnz; ++t) {
      if (!next_data_line(toks, storage)) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": unexpected end of entries");
      }
      std::size_t expect = 2 + (complex_field ? 2 : 1);
      if (toks.size() != expect) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad entry arity");
      }
      Index i = detail::parse_long(toks[0], line_no, path.c_str()) - 1;
      Index j = detail::parse_long(toks[1], line_no, path.c_str()) - 1;
      if (i < 0 || i >= mm.rows || j < 0 || j >= mm.cols) {
        throw DimensionMismatchError(path + ":" + std::to_string(line_no) + ": index out of range");
      }
      double re = detail::parse_double(toks[2], line_no, path.c_str());
      double im = complex_field ? detail::parse_double(toks[3], line_no, path.c_str()) : 0.0;
      Complex v(re, im);
      if (!std::isfinite(re) || !std::isfinite(im)) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite entry");
      }
      mm.coo_i.push_back(i);
      mm.coo_j.push_back(j);
      mm.coo_v.push_back(v);
      if (symmetry != "general" && i != j) {
        mm.coo_i.push_back(j);
        mm.coo_j.push_back(i);
        mm.coo_v.push_back(mirror(v));
      }
    }
  } else {
    if (toks.size() != 2) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'rows cols'");
    mm.rows = detail::parse_long(toks[0], line_no, path.c_str());
    mm.cols = detail::parse_long(toks[1], line_no, path.c_str());
    if (mm.rows <= 0 || mm.cols <= 0) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad sizes");
    }
    if (symmetry != "general" && mm.rows != mm.cols) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": symmetric array must be square");
    }
    mm.dense = Matrix::Zero(mm.rows, mm.cols);
    for (Index j = 0; j < mm.cols; ++j) {
      Index i0 = symmetry == "general" ? 0 : j;
      for (Index i = i0; i < mm.rows; ++i) {
        if (!next_data_line(toks, storage)) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": unexpected end of entries");
        }
        std::size_t expect = complex_field ? 2 : 1;
        if (toks.size() != expect) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": bad entry arity");
        }
        double re = detail::parse_double(toks[0], line_no, path.c_str());
        double im = complex_field ? detail::parse_double(toks[1], line_no, path.c_str()) : 0.0;
        if (!std::isfinite(re) || !std::isfinite(im)) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite entry");
        }
        mm.dense(i, j) = Complex(re, im);
        if (symmetry != "general" && i != j) mm.dense(j, i) = mirror(Complex(re, im));
      }
    }
  }
  return mm;
}

/// Write a dense matrix as a complex general array file, 17 significant digits.
inline void write_matrix_market_array(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("write_matrix_market_array: cannot open '" + path + "'");
  out << "%%MatrixMarket matrix array complex general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      out << detail::format_double(m(i, j).real()) << " "
          << detail::format_double(m(i, j).imag()) << "\n";
    }
  }
  if (!out) throw Error("write_matrix_market_array: write failed for '" + path + "'");
}

}  // namespace bmf
