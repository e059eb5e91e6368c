#pragma once

#include "blockeig/convergence.hpp"
#include "blockeig/precond.hpp"

namespace blockeig {

struct DavidsonOptions : SolverOptions {
  /// Basis columns kept per block column before a restart.
  int max_space_per_root = 25;
  /// Block columns kept on restart: the current Ritz vectors, the previous
  /// iterate, then further Ritz vectors of the reduced problem.
  int restart_keep = 2;

  void validate(Index n) const;
};

/**
 * Block Davidson baseline.
 *
 * The basis grows by one orthogonalized block of preconditioned residuals
 * per iteration and Rayleigh-Ritz runs over all of it. Once the next block
 * would push the width past max_space_per_root * m (or n / 2), the basis is
 * compressed to restart_keep * m_act columns. Locking, convergence tests and
 * preconditioning are shared with lobpcg_solve.
 */
EigenResult davidson_solve(const Operator& a, const Preconditioner& precond, const BlockVectors& x0,
                           const DavidsonOptions& opts);

EigenResult davidson_solve(const Operator& a, const Preconditioner& precond, const DavidsonOptions& opts);

}  // namespace blockeig
