#pragma once

#include "blockeig/linops.hpp"

namespace blockeig {

struct OrthoOptions {
  /// Target for max |X^T X - I| and max |Y^T X|.
  double tau_ortho = 1e-14;
  /// Target for max |X^T B X - I| in the B-metric variants.
  double tau_ortho_b = 1e-12;
  /// Initial diagonal shift is shift_base_factor * eps * ||X||_F.
  double shift_base_factor = 100.0;
  int max_refine_rounds = 10;
  int max_shift_attempts = 10;
  /// Skip the closing overlap recheck when the last factor was well
  /// conditioned enough that one more pass cannot be needed.
  bool fast_exit = false;

  void validate() const;
};

/// Counters accumulated across calls; pass the same instance to several
/// calls to get per-iteration totals.
struct OrthoStats {
  long cholesky_attempts = 0;     ///< every factorization tried, failed ones included
  long failed_factorizations = 0;
  long shifted_factorizations = 0;
  long refine_rounds = 0;         ///< X <- X L^{-T} updates
  long projection_rounds = 0;     ///< X <- X - Y (Y^T X) passes
  long b_applications = 0;        ///< columns pushed through B

  OrthoStats& operator+=(const OrthoStats& o);
};

/// The iteration cap was hit (or the block is numerically rank deficient).
/// `residual` is the last measured orthonormality / projection error.
class OrthoFailed : public std::runtime_error {
 public:
  OrthoFailed(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Orthonormalizes the columns of x by repeated (shifted when needed)
/// Cholesky factorizations of the overlap.
BlockVectors ortho(const BlockVectors& x, const OrthoOptions& opts = {}, OrthoStats* stats = nullptr);

/// Orthonormal basis of x projected onto the complement of the orthonormal
/// set y. Projection and orthonormalization alternate until max |Y^T X| <=
/// tau_ortho. An empty y reduces to ortho(x).
BlockVectors ortho_against(const BlockVectors& x, const BlockVectors& y, const OrthoOptions& opts = {},
                           OrthoStats* stats = nullptr);

struct BOrthoResult {
  BlockVectors x;
  BlockVectors bx;  ///< B x, carried along through the triangular updates
};

/// B-orthonormalizes x. B is applied once to a Euclidean-orthonormal copy
/// of x; later updates reuse that image through L^{-T}.
BOrthoResult ortho_b(const BlockVectors& x, const Operator& b, const OrthoOptions& opts = {},
                     OrthoStats* stats = nullptr);

/**
 * B-orthonormal basis of x with the B-orthonormal set ys projected out.
 *
 * Stage one projects along ys using the images bys = B ys and Euclidean
 * orthonormalizes, giving a well conditioned block that is B-orthogonal to
 * ys. Stage two applies B once and finishes with a Cholesky factorization of
 * the B-overlap, reusing the B image.
 */
BOrthoResult ortho_against_b(const BlockVectors& x, const BlockVectors& ys, const BlockVectors& bys,
                             const Operator& b, const OrthoOptions& opts = {}, OrthoStats* stats = nullptr);

/// Cholesky factor of m, shifting the diagonal on failure. The shift starts
/// at shift_base_factor * eps * sqrt(trace(m)) and doubles on every retry.
/// Throws OrthoFailed when max_shift_attempts is exhausted.
Matrix shifted_cholesky(const Matrix& m, const OrthoOptions& opts, OrthoStats* stats = nullptr);

}  // namespace blockeig
