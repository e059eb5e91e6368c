#include "blockeig/lobpcg.hpp"
#include "blockeig/problems.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace blockeig;
using namespace testing_support;

namespace {

// Random symmetric matrix whose lowest `sought` eigenvalues are separated
// by at least `gap` from each other and from the rest.
Matrix gapped_matrix(Index n, int sought, double gap, std::mt19937_64& rng, Vector* spectrum) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector lambda(n);
  double v = -1.0;
  for (Index i = 0; i < n; ++i) {
    v += (i <= sought ? gap : 0.0) + u(rng) * 4.0 / static_cast<double>(n);
    lambda(i) = v;
  }
  *spectrum = lambda;
  return with_spectrum(lambda, rng);
}

SolverOptions options(int sought, int extra) {
  SolverOptions o;
  o.n_sought = sought;
  o.n_extra = extra;
  o.max_iter = 500;
  return o;
}

}  // namespace

TEST(Lobpcg, DiagonalMatrixConvergesImmediately) {
  const Vector d = (Vector(12) << 5, 3, 9, 1, 7, 2, 8, 4, 6, 10, 11, 12).finished();
  const Operator op = Operator::diagonal_matrix(d);
  const EigenResult r = lobpcg_solve(op, Preconditioner::diagonal(d), options(3, 1));
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.stats.iterations, 0);
  EXPECT_EQ(r.eigenvalues, Vector((Vector(3) << 1, 2, 3).finished()));
}

TEST(Lobpcg, MatchesDenseOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 60 + 20 * trial;
    const int sought = 1 + trial % 5;
    Vector lambda;
    const Matrix a = gapped_matrix(n, sought, 1e-2, rng, &lambda);
    const Operator op = Operator::from_dense(a);
    SolverOptions o = options(sought, 3);
    const EigenResult r = lobpcg_solve(op, Preconditioner::for_operator(PrecondKind::diagonal, op, o.tol_rms), o);
    ASSERT_TRUE(r.converged) << "trial " << trial;
    const Vector oracle = dense_eigenvalues(a);
    EXPECT_LE((r.eigenvalues - oracle.head(sought)).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    EXPECT_LE(r.residual_rms.maxCoeff(), o.tol_rms);
    EXPECT_LE(r.residual_max.maxCoeff(), o.tol_max);
    EXPECT_LE(gram_error(r.eigenvectors), 1e-13);
    const Matrix res = a * r.eigenvectors - r.eigenvectors * r.eigenvalues.asDiagonal();
    EXPECT_LE(res.cwiseAbs().maxCoeff(), o.tol_max);
  }
}

TEST(Lobpcg, SubspaceStaysOrthonormalAndImagesStayConsistent) {
  std::mt19937_64 rng(7);
  Vector lambda;
  const Matrix a = gapped_matrix(150, 4, 1e-2, rng, &lambda);
  const Operator op = Operator::from_dense(a);
  SolverOptions o = options(4, 4);
  o.record_trace = true;
  o.check_reuse = true;
  const EigenResult r = lobpcg_solve(op, Preconditioner::identity(), o);
  ASSERT_TRUE(r.converged);
  const double anorm = a.cwiseAbs().rowwise().sum().maxCoeff();
  for (const auto& rec : r.trace->records) {
    ASSERT_TRUE(rec.basis_error && rec.reuse_error);
    EXPECT_LE(*rec.basis_error, 10 * o.ortho.tau_ortho) << "iter " << rec.iter;
    EXPECT_LE(*rec.reuse_error, 1e-12 * anorm) << "iter " << rec.iter;
  }
}

TEST(Lobpcg, RitzValuesDecreaseMonotonically) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    Vector lambda;
    const Matrix a = gapped_matrix(120, 3, 1e-3, rng, &lambda);
    SolverOptions o = options(3, 2);
    o.record_trace = true;
    const Operator op = Operator::from_dense(a);
    const EigenResult r = lobpcg_solve(op, Preconditioner::for_operator(PrecondKind::diagonal, op, 1e-9), o);
    const auto& recs = r.trace->records;
    for (size_t k = 1; k < recs.size(); ++k)
      for (size_t j = 0; j < recs[k].ritz.size(); ++j) EXPECT_LE(recs[k].ritz[j], recs[k - 1].ritz[j] + 1e-10);
  }
}

TEST(Lobpcg, TraceCountsOneApplicationPerActiveColumn) {
  std::mt19937_64 rng(13);
  Vector lambda;
  const Matrix a = gapped_matrix(100, 3, 1e-2, rng, &lambda);
  SolverOptions o = options(3, 3);
  o.record_trace = true;
  const EigenResult r = lobpcg_solve(Operator::from_dense(a), Preconditioner::identity(), o);
  const auto& recs = r.trace->records;
  ASSERT_GE(recs.size(), 2u);
  // Iteration 0: A X and A W for the whole block.
  EXPECT_EQ(recs[0].matvecs, 2 * o.block_size() - recs[0].locked);
  for (size_t k = 1; k + 1 < recs.size(); ++k) {
    EXPECT_EQ(recs[k].matvecs - recs[k - 1].matvecs, o.block_size() - recs[k].locked) << "iter " << k;
  }
  EXPECT_EQ(recs.back().matvecs, recs[recs.size() - 2].matvecs);
  EXPECT_EQ(r.stats.matvecs, recs.back().matvecs);
}

TEST(Lobpcg, LockedColumnsAreFrozen) {
  Vector lambda = Vector::LinSpaced(90, 2.0, 6.0);
  lambda(0) = 0.0;
  lambda(1) = 1.0;
  lambda(2) = 1.01;
  const Problem p = gen_from_spectrum(lambda, 0.5, 3);
  SolverOptions o = options(2, 0);
  o.record_trace = true;
  const Preconditioner pre = Preconditioner::identity();
  const EigenResult full = lobpcg_solve(p.op, pre, o);
  ASSERT_TRUE(full.converged);
  const auto& recs = full.trace->records;
  int lock_iter = -1;
  for (const auto& rec : recs)
    if (rec.locked >= 1 && lock_iter < 0) lock_iter = rec.iter;
  ASSERT_GE(lock_iter, 0);
  ASSERT_LT(lock_iter, full.stats.iterations);
  for (const auto& rec : recs)
    if (rec.iter > lock_iter) {
      EXPECT_EQ(rec.ritz[0], recs[static_cast<size_t>(lock_iter)].ritz[0]);
    }

  SolverOptions partial = o;
  partial.max_iter = lock_iter + 1;
  const EigenResult stopped = lobpcg_solve(p.op, pre, partial);
  EXPECT_FALSE(stopped.converged);
  EXPECT_TRUE(stopped.eigenvectors.col(0) == full.eigenvectors.col(0));
}

TEST(Lobpcg, ExactEigenvectorInTheGuessIsHarmless) {
  std::mt19937_64 rng(19);
  Matrix a = Matrix::Zero(61, 61);
  a.topLeftCorner(60, 60) = spd(60, 50.0, rng);
  a(60, 60) = 80.0;
  Matrix x0 = gaussian(61, 3, rng);
  x0.row(60).setZero();
  x0.col(2) = Vector::Unit(61, 60);
  SolverOptions o = options(1, 2);
  o.record_trace = true;
  const EigenResult r = lobpcg_solve(Operator::from_dense(a), Preconditioner::identity(), x0, o);
  ASSERT_TRUE(r.converged);
  // The zero residual of the exact pair gives no new direction.
  EXPECT_EQ(r.trace->records[0].matvecs, 2 * o.block_size() - 1);
  EXPECT_NEAR(r.eigenvalues(0), dense_eigenvalues(a)(0), 1e-9);
}

TEST(Lobpcg, MaxIterReturnsPartialResult) {
  std::mt19937_64 rng(17);
  Vector lambda;
  const Matrix a = gapped_matrix(200, 2, 1e-3, rng, &lambda);
  SolverOptions o = options(2, 1);
  o.max_iter = 3;
  o.record_trace = true;
  const EigenResult r = lobpcg_solve(Operator::from_dense(a), Preconditioner::identity(), o);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.stats.iterations, 3);
  EXPECT_EQ(r.trace->records.size(), 4u);
  EXPECT_EQ(r.eigenvalues.size(), 2);
}

TEST(Lobpcg, MatrixFreeOperator) {
  const Index n = 120;
  // 1D Laplacian plus a ramp, applied without storing entries.
  Operator op(n, [n](const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (Index i = 0; i < n; ++i) {
      y.row(i) = (2.0 + 0.01 * static_cast<double>(i)) * x.row(i);
      if (i > 0) y.row(i) -= x.row(i - 1);
      if (i + 1 < n) y.row(i) -= x.row(i + 1);
    }
    return y;
  });
  Matrix dense(n, n);
  dense = op.apply(Matrix::Identity(n, n));
  SolverOptions o = options(3, 3);
  const EigenResult r = lobpcg_solve(op, Preconditioner::identity(), o);
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.eigenvalues - dense_eigenvalues(dense).head(3)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lobpcg, EveryPreconditionerConvergesToTheSameAnswer) {
  ProblemSpec spec;
  spec.n = 300;
  spec.n_sought = 4;
  spec.n_extra = 3;
  const Operator op = gen_fci_like(spec);
  const Vector oracle = dense_eigenvalues(op.dense_entries());
  SolverOptions o = options(4, 3);
  for (auto kind : {PrecondKind::identity, PrecondKind::diagonal, PrecondKind::tridiagonal, PrecondKind::sparse_threshold}) {
    const EigenResult r = lobpcg_solve(op, Preconditioner::for_operator(kind, op, o.tol_rms), o);
    ASSERT_TRUE(r.converged) << to_string(kind);
    EXPECT_LE((r.eigenvalues - oracle.head(4)).cwiseAbs().maxCoeff(), 1e-8) << to_string(kind);
  }
}

TEST(Lobpcg, Deterministic) {
  std::mt19937_64 rng(19);
  Vector lambda;
  const Matrix a = gapped_matrix(100, 2, 1e-2, rng, &lambda);
  SolverOptions o = options(2, 2);
  o.record_trace = true;
  const Operator op = Operator::from_dense(a);
  const EigenResult r1 = lobpcg_solve(op, Preconditioner::identity(), o);
  const EigenResult r2 = lobpcg_solve(op, Preconditioner::identity(), o);
  EXPECT_TRUE(r1.eigenvectors == r2.eigenvectors);
  ASSERT_EQ(r1.trace->records.size(), r2.trace->records.size());
  for (size_t k = 0; k < r1.trace->records.size(); ++k) EXPECT_EQ(r1.trace->records[k].rms, r2.trace->records[k].rms);
}

TEST(Lobpcg, RankDeficientGuessIsAnError) {
  const Operator op = Operator::diagonal_matrix(Vector::LinSpaced(30, 1.0, 30.0));
  Matrix x0 = Matrix::Zero(30, 3);
  x0(0, 0) = x0(0, 1) = x0(1, 2) = 1.0;
  SolverOptions o = options(1, 2);
  EXPECT_THROW(lobpcg_solve(op, Preconditioner::identity(), x0, o), SolverError);
}

TEST(Lobpcg, WrongGuessShapeIsAnError) {
  const Operator op = Operator::diagonal_matrix(Vector::LinSpaced(30, 1.0, 30.0));
  EXPECT_THROW(lobpcg_solve(op, Preconditioner::identity(), Matrix::Identity(30, 2), options(1, 2)), DimensionError);
}

TEST(Lobpcg, BlockTooLargeIsRejected) {
  const Operator op = Operator::identity(10);
  EXPECT_THROW(lobpcg_solve(op, Preconditioner::identity(), options(2, 2)), std::invalid_argument);
}

TEST(Lobpcg, NanFromOperatorIsHardError) {
  Operator op(30, [](const Matrix& x) {
    Matrix y = x;
    y(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return y;
  });
  EXPECT_THROW(lobpcg_solve(op, Preconditioner::identity(), options(1, 1)), NumericalError);
}

TEST(LobpcgGeneralized, MatchesGeneralizedOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const Index n = 60 + 15 * trial;
    Matrix a = gaussian(n, n, rng);
    a = symmetrized(a);
    const Matrix b = spd(n, 1e3, rng);
    SolverOptions o = options(2, 2);
    o.max_iter = 2000;
    o.record_trace = true;
    o.check_reuse = true;
    const Operator aop = Operator::from_dense(a), bop = Operator::from_dense(b);
    const Matrix x0 = gaussian(n, o.block_size(), rng);
    const EigenResult r = lobpcg_solve_generalized(aop, bop, Preconditioner::identity(), x0, o);
    ASSERT_TRUE(r.converged) << "trial " << trial;
    const Vector oracle = dense_generalized_eigenvalues(a, b);
    EXPECT_LE((r.eigenvalues - oracle.head(2)).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LE(b_gram_error(r.eigenvectors, b), 1e-11);
    for (const auto& rec : r.trace->records) EXPECT_LE(*rec.basis_error, 10 * o.ortho.tau_ortho_b);
    EXPECT_GT(r.stats.bmatvecs, 0);
  }
}

TEST(LobpcgGeneralized, IdentityMetricMatchesStandard) {
  std::mt19937_64 rng(29);
  Vector lambda;
  const Matrix a = gapped_matrix(90, 2, 1e-2, rng, &lambda);
  const Operator op = Operator::from_dense(a);
  const SolverOptions o = options(2, 2);
  const Matrix x0 = default_guess(op, o.block_size());
  const EigenResult g = lobpcg_solve_generalized(op, Operator::identity(90), Preconditioner::identity(), x0, o);
  ASSERT_TRUE(g.converged);
  EXPECT_LE((g.eigenvalues - lambda.head(2)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BuildPCoefficients, SubtractsIdentityInTheXBlock) {
  const Matrix ux = Matrix::Constant(9, 3, 0.5);
  const Matrix up = build_p_coefficients(ux, 1);
  ASSERT_EQ(up.cols(), 2);
  EXPECT_DOUBLE_EQ(up(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(up(2, 1), -0.5);
  EXPECT_DOUBLE_EQ(up(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(up(2, 0), 0.5);
  EXPECT_EQ(build_p_coefficients(ux, 3).cols(), 0);
  EXPECT_THROW(build_p_coefficients(ux, 4), std::invalid_argument);
}

TEST(DefaultGuess, PicksSmallestDiagonalEntries) {
  const Vector d = (Vector(5) << 3, 1, 2, 1, 9).finished();
  const Matrix x = default_guess(Operator::diagonal_matrix(d), 3);
  EXPECT_EQ(x(1, 0), 1.0);
  EXPECT_EQ(x(3, 1), 1.0);
  EXPECT_EQ(x(2, 2), 1.0);
  EXPECT_EQ(x.sum(), 3.0);
}

TEST(DefaultGuess, RandomWhenMatrixFree) {
  Operator op(20, [](const Matrix& x) { return x; });
  const Matrix x = default_guess(op, 4, 5);
  EXPECT_LE(gram_error(x), 1e-14);
  EXPECT_EQ(x, default_guess(op, 4, 5));
  EXPECT_NE(x, default_guess(op, 4, 6));
}
