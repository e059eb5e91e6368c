#pragma once

#include "blockeig/linops.hpp"

#include <atomic>
#include <limits>
#include <memory>
#include <string>

namespace blockeig {

enum class PrecondKind { identity, diagonal, tridiagonal, sparse_threshold };

std::string to_string(PrecondKind kind);
PrecondKind parse_precond_kind(const std::string& name);

/// Thresholded sparse approximation M of A: entries with |A_ij| > tol and
/// the diagonal are kept. The looser tolerance is used far from
/// convergence, the tighter one once the residual RMS drops below
/// switch_factor * tol_rms.
struct SparseThresholdSpec {
  double tol_initial = 0.5;
  double tol_refined = 0.1;
  double switch_factor = 100.0;

  void validate() const;
};

/// Denominator floor used by the shifted diagonal (and tridiagonal) solves.
double clamp_floor(const Vector& diag);

/// out(i,j) = R(i,j) / (diag(i) - shifts(j)), denominators clamped away
/// from zero to magnitude 1e-6 * max|diag|.
Matrix diag_precond(const Vector& diag, const Matrix& r, const Vector& shifts);

/**
 * Solves (M - shifts(j) I) w_j = r_j for every column j with M tridiagonal
 * (sub-diagonal `lower`, diagonal `main`, super-diagonal `upper`), using
 * Gaussian elimination with partial pivoting.
 *
 * A numerically singular shifted system is retried with the shift moved by
 * the diagonal clamp floor; if that is singular too the column falls back to
 * diag_precond. `fallbacks`, when given, counts those columns.
 */
Matrix tridiag_precond(const Vector& lower, const Vector& main, const Vector& upper, const Matrix& r,
                       const Vector& shifts, long* fallbacks = nullptr);

/// Applies the thresholding rule to the entries of a.
SparseMatrix threshold_matrix(const SparseMatrix& a, double tol);

/// Preconditioner W = T(R; shifts) applied blockwise to residuals.
class Preconditioner {
 public:
  static Preconditioner identity();
  static Preconditioner diagonal(Vector diag);
  static Preconditioner tridiagonal(Vector lower, Vector main, Vector upper);
  /// Factorizes M for both tolerances up front. `tol_rms` anchors the
  /// switch criterion.
  static Preconditioner sparse_threshold(const SparseMatrix& a, const SparseThresholdSpec& spec, double tol_rms);

  /// Builds the requested kind from an operator. Anything beyond identity
  /// needs the diagonal; tridiagonal and sparse_threshold need entries.
  static Preconditioner for_operator(PrecondKind kind, const Operator& a, double tol_rms,
                                     const SparseThresholdSpec& spec = {});

  PrecondKind kind() const;

  /// `shifts` holds one Ritz value per column of r. `residual_rms` drives
  /// the sparse tolerance switch and is ignored by the other kinds.
  Matrix apply(const Matrix& r, const Vector& shifts,
               double residual_rms = std::numeric_limits<double>::infinity()) const;

  /// Columns that fell back to diagonal scaling (singular systems).
  long fallback_count() const;

  /// True when the sparse kind would use the refined tolerance at this rms.
  bool uses_refined(double residual_rms) const;

  class Impl;

 private:
  explicit Preconditioner(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

}  // namespace blockeig
