#pragma once

#include "blockeig/linops.hpp"
#include "blockeig/ortho.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockeig {

/// How the scalar residual RMS reported per iteration is formed.
enum class RmsMode {
  block,       ///< RMS over every entry of the active residual block
  max_column,  ///< largest per-column RMS
};

struct SolverOptions {
  int n_sought = 1;
  int n_extra = 5;
  double tol_rms = 1e-9;
  double tol_max = 1e-8;
  int max_iter = 100;
  OrthoOptions ortho;
  RmsMode rms_mode = RmsMode::block;
  bool record_trace = false;
  /// Recompute A X, A W, A P (and B images) explicitly every iteration and
  /// record the distance to the reused images. Costs extra applications
  /// that are not counted in the statistics.
  bool check_reuse = false;
  /// Seed for the random initial block when no guess can be derived.
  unsigned long seed = 42;

  int block_size() const { return n_sought + n_extra; }
  /// Throws std::invalid_argument on violated invariants.
  void validate(Index n) const;
};

struct IterationRecord {
  int iter = 0;
  std::vector<double> ritz;  ///< all m Ritz values, ascending
  double rms = 0.0;          ///< over the sought columns still active at this iteration
  double max_abs = 0.0;
  int locked = 0;
  long matvecs = 0;   ///< cumulative A applications (columns)
  long bmatvecs = 0;  ///< cumulative B applications (columns)
  long ortho_passes = 0;    ///< Cholesky updates performed during this iteration
  long shifts_engaged = 0;  ///< shifted factorizations during this iteration
  int subspace = 0;         ///< columns in the Rayleigh-Ritz basis
  std::optional<double> reuse_error;  ///< max |AV - A V| when check_reuse is on
  std::optional<double> basis_error;  ///< max |V^T V - I| (or V^T B V) when check_reuse is on
};

struct ConvergenceTrace {
  std::vector<IterationRecord> records;
};

struct SolveStats {
  int iterations = 0;
  long matvecs = 0;
  long bmatvecs = 0;
  OrthoStats ortho;
  long precond_fallbacks = 0;
  bool p_dropped = false;  ///< at least one iteration ran without P (stagnation)
};

struct EigenResult {
  Vector eigenvalues;   ///< n_sought, ascending
  Matrix eigenvectors;  ///< n x n_sought
  bool converged = false;
  std::optional<ConvergenceTrace> trace;
  SolveStats stats;
  /// Final residual RMS / max-abs over the n_sought returned pairs.
  Vector residual_rms;
  Vector residual_max;
};

/// Failure inside a solver run, tagged with the iteration it happened in.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct ConvergenceCheck {
  std::vector<bool> eligible;  ///< per column: rms <= tol_rms and max|.| <= tol_max
  double rms = 0.0;
  double max_abs = 0.0;
  Vector column_rms;
  Vector column_max;
};

/// Per-column dual-threshold test on the active residual block.
ConvergenceCheck check_convergence(const BlockVectors& r_active, const SolverOptions& opts);

/// Length of the leading run of eligible columns, capped at `limit`
/// (only sought columns are ever locked).
int lockable_prefix(const std::vector<bool>& eligible, int limit);

}  // namespace blockeig
