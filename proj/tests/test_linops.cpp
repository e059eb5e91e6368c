#include "blockeig/linops.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace blockeig;
using testing_support::gaussian;
using testing_support::naive_product;

TEST(Operator, DenseApplyMatchesNaiveProduct) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 5 + trial * 7;
    Matrix a = gaussian(n, n, rng);
    a = 0.5 * (a + a.transpose()).eval();
    const Matrix x = gaussian(n, 1 + trial % 4, rng);
    const Operator op = Operator::from_dense(a);
    EXPECT_LE(max_abs(op.apply(x) - naive_product(a, x)), 1e-12 * n);
  }
}

TEST(Operator, SparseApplyAndDiagonal) {
  std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {1, 1, -1.0}, {2, 2, 4.0}, {0, 2, 0.5}, {2, 0, 0.5}};
  SparseMatrix s(3, 3);
  s.setFromTriplets(t.begin(), t.end());
  const Operator op = Operator::from_sparse(s);
  ASSERT_TRUE(op.diagonal().has_value());
  EXPECT_EQ(*op.diagonal(), Vector((Vector(3) << 2.0, -1.0, 4.0).finished()));
  const Matrix x = Matrix::Identity(3, 3);
  EXPECT_EQ(op.apply(x), Matrix(s));
  EXPECT_TRUE(op.has_entries());
  EXPECT_DOUBLE_EQ(*op.norm1(), 4.5);
}

TEST(Operator, IdentityIsExact) {
  std::mt19937_64 rng(1);
  const Matrix x = gaussian(7, 3, rng);
  EXPECT_EQ(Operator::identity(7).apply(x), x);
}

TEST(Operator, DiagonalMatrixScalesRows) {
  const Vector d = (Vector(3) << 1.0, 2.0, 3.0).finished();
  const Matrix y = Operator::diagonal_matrix(d).apply(Matrix::Ones(3, 2));
  EXPECT_EQ(y.col(1), d);
}

TEST(Operator, WrongRowCountThrows) {
  const Operator op = Operator::identity(4);
  EXPECT_THROW(op.apply(Matrix::Zero(5, 1)), DimensionError);
}

TEST(Operator, MatrixFreeHasNoEntries) {
  const Operator op(3, [](const Matrix& x) { return Matrix(2.0 * x); });
  EXPECT_FALSE(op.has_entries());
  EXPECT_FALSE(op.diagonal().has_value());
  EXPECT_THROW(op.sparse_entries(), std::logic_error);
  EXPECT_EQ(op.apply(Matrix::Ones(3, 1)), Matrix::Constant(3, 1, 2.0));
}

TEST(Cholesky, ReproducesSpdMatrix) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index k = 1 + trial % 9;
    const Matrix g = gaussian(3 * k, k, rng);
    const Matrix m = g.transpose() * g;
    const auto l = cholesky(m);
    ASSERT_TRUE(l.has_value());
    EXPECT_TRUE(l->isLowerTriangular());
    EXPECT_LE(max_abs(*l * l->transpose() - m), 1e-13 * m.cwiseAbs().maxCoeff());
  }
}

TEST(Cholesky, RejectsIndefiniteAndSingular) {
  const Matrix indefinite = (Matrix(2, 2) << 1.0, 2.0, 2.0, 1.0).finished();
  EXPECT_FALSE(cholesky(indefinite).has_value());
  const Matrix singular = Matrix::Ones(3, 3);
  EXPECT_FALSE(cholesky(singular).has_value());
  EXPECT_FALSE(cholesky(Matrix::Zero(2, 2)).has_value());
}

TEST(Cholesky, NanIsAHardError) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cholesky(m), NumericalError);
}

TEST(TriSolveRight, InvertsTransposedFactor) {
  std::mt19937_64 rng(8);
  const Matrix g = gaussian(12, 4, rng);
  const Matrix l = *cholesky(g.transpose() * g);
  const Matrix x = gaussian(10, 4, rng);
  EXPECT_LE(max_abs(tri_solve_right(x, l) * l.transpose() - x), 1e-12);
  Matrix bad = l;
  bad(2, 2) = 0.0;
  EXPECT_THROW(tri_solve_right(x, bad), NumericalError);
}

TEST(SymEig, AscendingOrthonormal) {
  std::mt19937_64 rng(2);
  Matrix a = gaussian(8, 8, rng);
  a = symmetrized(a);
  const SymEig e = symeig(a);
  for (Index i = 1; i < 8; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  EXPECT_LE(orthonormality_error(e.vectors), 1e-14);
  EXPECT_LE(max_abs(a * e.vectors - e.vectors * e.values.asDiagonal()), 1e-12);
}

TEST(SymEig, NonFiniteThrows) {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = a(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(symeig(a), NumericalError);
}

TEST(Helpers, EmptyAndTrivialCases) {
  EXPECT_EQ(max_abs(Matrix(0, 0)), 0.0);
  EXPECT_EQ(rms(Matrix(3, 0)), 0.0);
  EXPECT_DOUBLE_EQ(rms(Matrix::Constant(2, 2, 3.0)), 3.0);
  EXPECT_EQ(orthonormality_error(Matrix::Identity(5, 3)), 0.0);
  const Matrix a = Matrix::Ones(3, 2);
  EXPECT_EQ(hcat(a, Matrix(3, 0)), a);
  EXPECT_EQ(hcat(Matrix(3, 0), a), a);
  EXPECT_EQ(hcat(a, a).cols(), 4);
  EXPECT_EQ(block_inner(a, a), Matrix::Constant(2, 2, 3.0));
  Matrix nan = a;
  nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(all_finite(nan));
  EXPECT_TRUE(all_finite(a));
}
