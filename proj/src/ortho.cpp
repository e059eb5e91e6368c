#include "blockeig/ortho.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace blockeig {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const Matrix& a, const char* where) {
  if (!all_finite(a)) throw NumericalError(std::string(where) + ": non-finite entries");
}

std::string describe(const char* what, int rounds, double err) {
  std::ostringstream os;
  os << what << " after " << rounds << " rounds (error " << err << ")";
  return os.str();
}

// Frobenius-norm condition estimate of a small triangular factor.
double triangular_condition(const Matrix& l) {
  Matrix inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(l.rows(), l.cols()));
  return l.norm() * inv.norm();
}

// Loop of Cholesky updates on an overlap maintained through `overlap`. The
// same triangular update is applied to every block in `carried`.
template <typename OverlapFn>
void cholesky_refine(BlockVectors& x, BlockVectors* carried, OverlapFn overlap, double tau,
                     const OrthoOptions& opts, OrthoStats* stats, const char* who) {
  const Index k = x.cols();
  for (int round = 0;; ++round) {
    Matrix m = symmetrized(overlap());
    const double err = max_abs(m - Matrix::Identity(k, k));
    if (err <= tau) return;
    if (round >= opts.max_refine_rounds) throw OrthoFailed(describe(who, round, err), err);

    Matrix l = shifted_cholesky(m, opts, stats);
    x = tri_solve_right(x, l);
    if (carried) *carried = tri_solve_right(*carried, l);
    require_finite(x, who);
    if (stats) ++stats->refine_rounds;

    if (opts.fast_exit) {
      // One Cholesky pass leaves an orthogonality error of order
      // k eps cond(L)^2.
      const double c = triangular_condition(l);
      if (static_cast<double>(k) * kEps * c * c <= tau) return;
    }
  }
}

// One common factor, so that the longest column has unit norm. Relative
// column lengths (and the conditioning) are left alone.
void rescale(BlockVectors& x, const char* who) {
  const Vector norms = x.colwise().norm();
  for (Index j = 0; j < x.cols(); ++j) {
    if (!(norms(j) > 0.0)) {
      throw OrthoFailed(std::string(who) + ": column " + std::to_string(j) + " is zero", 1.0);
    }
  }
  x /= norms.maxCoeff();
}

// A column that loses all but a tau fraction of its length to the
// projection lies in the span of the fixed set.
void reject_contained(const BlockVectors& before, const BlockVectors& after, double tau, const char* who) {
  for (Index j = 0; j < after.cols(); ++j) {
    const double left = after.col(j).norm(), was = before.col(j).norm();
    if (!(left > tau * was)) {
      throw OrthoFailed(std::string(who) + ": column " + std::to_string(j) + " lies in the span of the fixed set",
                        was > 0.0 ? left / was : 0.0);
    }
  }
}

}  // namespace

void OrthoOptions::validate() const {
  if (!(tau_ortho > 0.0) || !(tau_ortho_b > 0.0)) throw std::invalid_argument("ortho tolerances must be positive");
  if (!(shift_base_factor >= 1.0)) throw std::invalid_argument("shift_base_factor must be >= 1");
  if (max_refine_rounds < 1 || max_shift_attempts < 1) throw std::invalid_argument("ortho caps must be >= 1");
}

OrthoStats& OrthoStats::operator+=(const OrthoStats& o) {
  cholesky_attempts += o.cholesky_attempts;
  failed_factorizations += o.failed_factorizations;
  shifted_factorizations += o.shifted_factorizations;
  refine_rounds += o.refine_rounds;
  projection_rounds += o.projection_rounds;
  b_applications += o.b_applications;
  return *this;
}

Matrix shifted_cholesky(const Matrix& m, const OrthoOptions& opts, OrthoStats* stats) {
  if (stats) ++stats->cholesky_attempts;
  if (auto l = cholesky(m)) return *l;
  if (stats) ++stats->failed_factorizations;

  double shift = opts.shift_base_factor * kEps * std::sqrt(std::max(m.trace(), 0.0));
  if (!(shift > 0.0)) shift = opts.shift_base_factor * kEps;
  // Once shifted, any pivot above the rounding level of the factorization
  // itself is accepted.
  const double floor = static_cast<double>(std::max<Index>(m.rows(), 1)) * kEps;
  Matrix shifted = m;
  for (int attempt = 0; attempt < opts.max_shift_attempts; ++attempt, shift *= 2.0) {
    shifted.diagonal() = m.diagonal().array() + shift;
    if (stats) {
      ++stats->cholesky_attempts;
      ++stats->shifted_factorizations;
    }
    if (auto l = cholesky(shifted, floor)) return *l;
    if (stats) ++stats->failed_factorizations;
  }
  throw OrthoFailed("shifted Cholesky failed after " + std::to_string(opts.max_shift_attempts) + " shifts", shift);
}

BlockVectors ortho(const BlockVectors& x_in, const OrthoOptions& opts, OrthoStats* stats) {
  require_finite(x_in, "ortho");
  BlockVectors x = x_in;
  if (x.cols() == 0) return x;
  if (orthonormality_error(x) <= opts.tau_ortho) return x;

  rescale(x, "ortho");
  cholesky_refine(
      x, nullptr, [&] { return Matrix(x.transpose() * x); }, opts.tau_ortho, opts, stats, "ortho");
  return x;
}

BlockVectors ortho_against(const BlockVectors& x_in, const BlockVectors& y, const OrthoOptions& opts,
                           OrthoStats* stats) {
  if (y.cols() == 0) return ortho(x_in, opts, stats);
  if (x_in.rows() != y.rows()) throw DimensionError("ortho_against: row mismatch");
  require_finite(x_in, "ortho_against");
  BlockVectors x = x_in;
  if (x.cols() == 0) return x;

  double err = 0.0;
  int round = 0;
  do {
    if (round >= opts.max_refine_rounds) throw OrthoFailed(describe("ortho_against", round, err), err);
    x -= y * (y.transpose() * x);
    if (round == 0) reject_contained(x_in, x, opts.tau_ortho, "ortho_against");
    x = ortho(x, opts, stats);
    if (stats) ++stats->projection_rounds;
    ++round;
    err = max_abs(y.transpose() * x);
  } while (err > opts.tau_ortho);
  return x;
}

BOrthoResult ortho_b(const BlockVectors& x_in, const Operator& b, const OrthoOptions& opts, OrthoStats* stats) {
  BOrthoResult out;
  out.x = ortho(x_in, opts, stats);
  out.bx = b.apply(out.x);
  if (stats) stats->b_applications += out.x.cols();
  require_finite(out.bx, "ortho_b");
  cholesky_refine(
      out.x, &out.bx, [&] { return Matrix(out.x.transpose() * out.bx); }, opts.tau_ortho_b, opts, stats,
      "ortho_b");
  return out;
}

BOrthoResult ortho_against_b(const BlockVectors& x_in, const BlockVectors& ys, const BlockVectors& bys,
                             const Operator& b, const OrthoOptions& opts, OrthoStats* stats) {
  if (ys.cols() == 0) return ortho_b(x_in, b, opts, stats);
  if (ys.rows() != x_in.rows() || bys.rows() != x_in.rows() || bys.cols() != ys.cols()) {
    throw DimensionError("ortho_against_b: shape mismatch");
  }
  require_finite(x_in, "ortho_against_b");

  // Oblique projection I - Ys (B Ys)^T keeps X inside span(X, Ys) while
  // removing its B-component along Ys.
  BlockVectors x = x_in;
  double err = 0.0;
  int round = 0;
  do {
    if (round >= opts.max_refine_rounds) throw OrthoFailed(describe("ortho_against_b", round, err), err);
    x -= ys * (bys.transpose() * x);
    if (round == 0) reject_contained(x_in, x, opts.tau_ortho_b, "ortho_against_b");
    x = ortho(x, opts, stats);
    if (stats) ++stats->projection_rounds;
    ++round;
    err = max_abs(bys.transpose() * x);
  } while (err > opts.tau_ortho_b);

  BOrthoResult out;
  out.x = std::move(x);
  out.bx = b.apply(out.x);
  if (stats) stats->b_applications += out.x.cols();
  require_finite(out.bx, "ortho_against_b");
  cholesky_refine(
      out.x, &out.bx, [&] { return Matrix(out.x.transpose() * out.bx); }, opts.tau_ortho_b, opts, stats,
      "ortho_against_b");
  return out;
}

}  // namespace blockeig
