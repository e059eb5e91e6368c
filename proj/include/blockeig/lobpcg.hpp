#pragma once

#include "blockeig/convergence.hpp"
#include "blockeig/linops.hpp"
#include "blockeig/precond.hpp"

namespace blockeig {

/// Initial block of m columns: unit vectors at the m smallest diagonal
/// entries when the diagonal is known, otherwise a seeded random block.
BlockVectors default_guess(const Operator& a, int m, unsigned long seed = 42);

/**
 * Lowest eigenpairs of the symmetric operator a by LOBPCG.
 *
 * The Rayleigh-Ritz basis is (X, W, P), kept orthonormal with ortho /
 * ortho_against. Images A X and A P are never recomputed: they are updated
 * with the orthogonal reduced-space coefficients, so A is applied only to
 * the new W block (m_act columns per iteration).
 *
 * Converged leading pairs are locked: they stay in X bit-for-bit, W and P
 * are orthogonalized against them, and the Rayleigh-Ritz step runs on the
 * active columns only.
 *
 * x0 must have n_sought + n_extra columns. Hitting max_iter returns a
 * partial result with converged == false. Orthogonalization failures
 * surface as SolverError.
 */
EigenResult lobpcg_solve(const Operator& a, const Preconditioner& precond, const BlockVectors& x0,
                         const SolverOptions& opts);

/// Same, starting from default_guess.
EigenResult lobpcg_solve(const Operator& a, const Preconditioner& precond, const SolverOptions& opts);

/// A x = lambda B x with B symmetric positive definite. The basis is kept
/// B-orthonormal and B X, B W, B P follow the same reuse rules as the A
/// images.
EigenResult lobpcg_solve_generalized(const Operator& a, const Operator& b, const Preconditioner& precond,
                                     const BlockVectors& x0, const SolverOptions& opts);

/// Coefficients of X_new - X_old in the Rayleigh-Ritz basis for the
/// columns that remain active: the last (m - n_locked) columns of u_x with
/// one subtracted from their entries in the X block.
Matrix build_p_coefficients(const Matrix& u_x, int n_locked);

}  // namespace blockeig
