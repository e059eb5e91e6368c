#pragma once

#include "blockeig/linops.hpp"

#include <limits>
#include <optional>
#include <string>

namespace blockeig {

enum class ProblemKind { fci_like, scf_hessian_like, cas_hessian_like, file };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& name);

/// Parameters of the synthetic test problems. The same parameters always produce
/// the same matrix.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::fci_like;
  Index n = 500;
  /// Fraction of off-diagonal pairs that are nonzero (sparse kinds).
  double density = 0.02;
  /// Diagonal spread relative to off-diagonal size. Infinity gives a
  /// diagonal matrix for fci_like; for the Hessian kinds the rotation that
  /// mixes the spectrum scales as 1 / dominance.
  double dominance = 1.0;
  /// When positive, eigenvalues n_sought+1 .. m+1 (1-based, m = n_sought +
  /// n_extra) are packed so that lambda_{m+1} - lambda_{n_sought} equals
  /// this value.
  double gap_control = 0.0;
  int negative_count = 8;
  int n_sought = 1;
  int n_extra = 5;
  unsigned long seed = 1;
  std::string path;  ///< Matrix Market file for ProblemKind::file

  void validate() const;
};

struct Problem {
  Operator op;
  /// Full ascending spectrum when known by construction.
  std::optional<Vector> exact_eigenvalues;
  std::string description;
};

/// Sparse, diagonally dominant, increasing diagonal; off-diagonals bounded
/// by diagonal_spacing / dominance.
Operator gen_fci_like(const ProblemSpec& spec);

/// Dense symmetric Q diag(lambda) Q^T with a prescribed, partly negative
/// spectrum. Q is a Cayley rotation whose strength grows as dominance
/// shrinks.
Problem gen_indefinite_hessian(const ProblemSpec& spec);

/// Q diag(lambda) Q^T with an explicit spectrum; `mixing` sets the size of
/// the skew generator of Q.
Problem gen_from_spectrum(const Vector& lambda, double mixing, unsigned long seed);

/// Positive definite Hessian-like matrix: an ill-conditioned orbital block
/// (first max(m + 1, n / 5) rows) with a few strong couplings per row and a
/// weak dense background, then a diagonally dominant block with sparse weak
/// couplings (density, scaled by 1 / dominance). Thresholding at 0.5 or 0.1
/// keeps the strong couplings only. gap_control is ignored; the spectrum is
/// not known in closed form.
Problem gen_cas_hessian_like(const ProblemSpec& spec);

/// Dispatches on spec.kind (file kinds read spec.path).
Problem make_problem(const ProblemSpec& spec);

/// Random orthogonal matrix (I - S)^{-1} (I + S), S skew with N(0, sigma^2)
/// entries.
Matrix cayley_rotation(Index n, double sigma, unsigned long seed);

}  // namespace blockeig
