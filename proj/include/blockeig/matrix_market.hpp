#pragma once

#include "blockeig/linops.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace blockeig {

/// Malformed Matrix Market input; `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Supported inputs: "matrix coordinate real symmetric" (lower triangle
// stored), "matrix coordinate real general" and "matrix array real general",
// all square. Indices in files are 1-based.
SparseMatrix read_matrix_market_entries(std::istream& in);
SparseMatrix read_matrix_market_entries(const std::string& path);
/// Throws std::invalid_argument unless the matrix is symmetric to 1e-12 relative.
Operator read_matrix_market(const std::string& path);

/// Writes a symmetric matrix as "coordinate real symmetric", lower triangle
/// only, values with 17 significant digits so that reading back is exact.
/// Throws std::invalid_argument if a is not exactly symmetric.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market(const std::string& path, const SparseMatrix& a);

/// Dense block (e.g. eigenvectors) as "array real general".
void write_matrix_market_array(std::ostream& out, const Matrix& a);
void write_matrix_market_array(const std::string& path, const Matrix& a);
Matrix read_matrix_market_array(const std::string& path);

}  // namespace blockeig
