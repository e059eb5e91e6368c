#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace blockeig {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// An n x k block of column vectors. All subspace bookkeeping (X, W, P and
// their operator images) is done in these.
using BlockVectors = Matrix;

/// Raised for violated preconditions and non-finite data. Distinct from the
/// recoverable outcomes (Cholesky failure, unconverged solves).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Symmetric linear operator known only through its action on blocks.
 *
 * The apply function may be backed by anything (a stored matrix, a direct
 * matrix-vector product code, ...). When the entries are available they can
 * be attached so that preconditioners needing explicit elements (diagonal,
 * tridiagonal, thresholded sparse) can be assembled.
 */
class Operator {
 public:
  using ApplyFn = std::function<Matrix(const Matrix&)>;

  Operator(Index dim, ApplyFn apply);

  static Operator from_dense(Matrix a);
  static Operator from_sparse(SparseMatrix a);
  static Operator identity(Index dim);
  static Operator diagonal_matrix(const Vector& d);

  Index dim() const { return dim_; }

  /// Y = A X. Throws DimensionError if X has the wrong row count.
  Matrix apply(const Matrix& x) const;

  const std::optional<Vector>& diagonal() const { return diagonal_; }
  void set_diagonal(Vector d);

  /// True when the stored entries can be handed out (dense or sparse backed).
  bool has_entries() const { return dense_ != nullptr || sparse_ != nullptr; }

  /// Sparse copy of the entries; throws std::logic_error when matrix-free.
  SparseMatrix sparse_entries() const;
  /// Dense copy of the entries; throws std::logic_error when matrix-free.
  Matrix dense_entries() const;

  /// Largest absolute row sum, when entries are available.
  std::optional<double> norm1() const;

 private:
  Index dim_;
  ApplyFn apply_;
  std::optional<Vector> diagonal_;
  std::shared_ptr<const Matrix> dense_;
  std::shared_ptr<const SparseMatrix> sparse_;
};

/// X^T Y.
Matrix block_inner(const BlockVectors& x, const BlockVectors& y);

/// Ascending eigenvalues and the matching orthonormal eigenvectors.
struct SymEig {
  Vector values;
  Matrix vectors;
};

/// Dense symmetric eigensolve of a (small) reduced matrix.
SymEig symeig(const Matrix& a);

/// Returns a symmetric copy (A + A^T) / 2.
Matrix symmetrized(const Matrix& a);

/// Pivots at or below kCholeskyPivotFloor * max |m_jj| are rounding noise.
/// The overlap of a block with condition number much past 1e6 cannot be
/// told apart from a singular one at that level.
inline constexpr double kCholeskyPivotFloor = 5e-13;

/**
 * Lower Cholesky factor of a symmetric matrix, or std::nullopt when the
 * matrix is not positive definite to working precision, i.e. when some
 * pivot does not exceed rel_floor * max |m_jj|.
 */
std::optional<Matrix> cholesky(const Matrix& m, double rel_floor = kCholeskyPivotFloor);

/// X L^{-T} for lower-triangular L.
BlockVectors tri_solve_right(const BlockVectors& x, const Matrix& l);

/// max |a_ij|; zero for empty matrices.
double max_abs(const Matrix& a);

/// sqrt(mean(a_ij^2)); zero for empty matrices.
double rms(const Matrix& a);

/// max |X^T X - I|.
double orthonormality_error(const BlockVectors& x);

bool all_finite(const Matrix& a);

/// Horizontal concatenation [a b]; either side may have zero columns.
Matrix hcat(const Matrix& a, const Matrix& b);

}  // namespace blockeig
