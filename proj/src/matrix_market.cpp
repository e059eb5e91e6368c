#include "blockeig/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace blockeig {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Header {
  bool coordinate = true;
  bool symmetric = false;
};

Header parse_header(const std::string& line) {
  std::istringstream is(line);
  std::string banner, object, format, field, symmetry;
  is >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", 1);
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw ParseError("unsupported object '" + object + "'", 1);
  if (field != "real" && field != "double" && field != "integer") {
    throw ParseError("unsupported field '" + field + "'", 1);
  }
  Header h;
  if (format == "coordinate") {
    h.coordinate = true;
  } else if (format == "array") {
    h.coordinate = false;
  } else {
    throw ParseError("unsupported format '" + format + "'", 1);
  }
  if (symmetry == "symmetric") h.symmetric = true;
  else if (symmetry != "general") throw ParseError("unsupported symmetry '" + symmetry + "'", 1);
  return h;
}

// Next non-comment, non-blank line; false at EOF.
bool next_data_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

double parse_value(const std::string& tok, long lineno) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw ParseError("malformed value '" + tok + "'", lineno);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("malformed value '" + tok + "'", lineno);
  }
}

long parse_index(const std::string& tok, long lineno) {
  try {
    size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw ParseError("malformed index '" + tok + "'", lineno);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("malformed index '" + tok + "'", lineno);
  }
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix read_array_body(std::istream& in, long& lineno, const Header& h, bool require_square) {
  std::string line;
  if (!next_data_line(in, line, lineno)) throw ParseError("missing size line", lineno);
  auto size = tokens(line);
  if (size.size() != 2) throw ParseError("array size line needs 'rows cols'", lineno);
  const long rows = parse_index(size[0], lineno), cols = parse_index(size[1], lineno);
  if (rows < 0 || cols < 0) throw ParseError("negative dimension", lineno);
  if (require_square && rows != cols) throw ParseError("matrix must be square", lineno);
  if (h.symmetric && rows != cols) throw ParseError("symmetric matrix must be square", lineno);
  Matrix a = Matrix::Zero(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = h.symmetric ? j : 0; i < rows; ++i) {
      if (!next_data_line(in, line, lineno)) throw ParseError("unexpected end of file", lineno);
      auto tok = tokens(line);
      if (tok.size() != 1) throw ParseError("expected one value per line", lineno);
      a(i, j) = parse_value(tok[0], lineno);
      if (h.symmetric) a(j, i) = a(i, j);
    }
  }
  if (next_data_line(in, line, lineno)) throw ParseError("trailing data after matrix entries", lineno);
  return a;
}

}  // namespace

SparseMatrix read_matrix_market_entries(std::istream& in) {
  long lineno = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  ++lineno;
  const Header h = parse_header(line);
  if (!h.coordinate) return read_array_body(in, lineno, h, true).sparseView(0.0, 0.0);

  if (!next_data_line(in, line, lineno)) throw ParseError("missing size line", lineno);
  auto size = tokens(line);
  if (size.size() != 3) throw ParseError("coordinate size line needs 'rows cols nnz'", lineno);
  const long rows = parse_index(size[0], lineno), cols = parse_index(size[1], lineno);
  const long nnz = parse_index(size[2], lineno);
  if (rows <= 0 || cols <= 0 || nnz < 0) throw ParseError("invalid dimensions", lineno);
  if (rows != cols) throw ParseError("matrix must be square", lineno);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(h.symmetric ? 2 * nnz : nnz));
  for (long k = 0; k < nnz; ++k) {
    if (!next_data_line(in, line, lineno)) throw ParseError("unexpected end of file after " + std::to_string(k) + " entries", lineno);
    auto tok = tokens(line);
    if (tok.size() != 3) throw ParseError("expected 'row col value'", lineno);
    const long i = parse_index(tok[0], lineno), j = parse_index(tok[1], lineno);
    const double v = parse_value(tok[2], lineno);
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("index out of range", lineno);
    if (h.symmetric && i < j) throw ParseError("symmetric file must store the lower triangle", lineno);
    entries.emplace_back(i - 1, j - 1, v);
    if (h.symmetric && i != j) entries.emplace_back(j - 1, i - 1, v);
  }
  if (next_data_line(in, line, lineno)) throw ParseError("more entries than declared", lineno);

  SparseMatrix a(rows, cols);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  return a;
}

SparseMatrix read_matrix_market_entries(const std::string& path) {
  auto in = open_in(path);
  return read_matrix_market_entries(in);
}

Operator read_matrix_market(const std::string& path) {
  SparseMatrix a = read_matrix_market_entries(path);
  const SparseMatrix at = a.transpose();
  if ((a - at).norm() > 1e-12 * a.norm()) throw std::invalid_argument("'" + path + "' is not symmetric");
  return Operator::from_sparse(std::move(a));
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a_in) {
  if (a_in.rows() != a_in.cols()) throw std::invalid_argument("write_matrix_market: matrix must be square");
  SparseMatrix a = a_in;
  a.makeCompressed();
  SparseMatrix at = a.transpose();
  if ((a - at).norm() != 0.0) throw std::invalid_argument("write_matrix_market: matrix is not symmetric");

  std::vector<std::pair<std::pair<Index, Index>, double>> lower_entries;
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() >= it.col()) lower_entries.push_back({{it.col(), it.row()}, it.value()});
    }
  }
  std::sort(lower_entries.begin(), lower_entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.rows() << ' ' << a.cols() << ' ' << lower_entries.size() << '\n';
  for (const auto& [cj, v] : lower_entries) {
    out << (cj.second + 1) << ' ' << (cj.first + 1) << ' ' << format_value(v) << '\n';
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  auto out = open_out(path);
  write_matrix_market(out, a);
}

void write_matrix_market_array(std::ostream& out, const Matrix& a) {
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out << format_value(a(i, j)) << '\n';
}

void write_matrix_market_array(const std::string& path, const Matrix& a) {
  auto out = open_out(path);
  write_matrix_market_array(out, a);
}

Matrix read_matrix_market_array(const std::string& path) {
  auto in = open_in(path);
  long lineno = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  ++lineno;
  const Header h = parse_header(line);
  if (h.coordinate) throw ParseError("expected array format", 1);
  return read_array_body(in, lineno, h, false);
}

}  // namespace blockeig
