#pragma once

#include "blockeig/linops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace testing_support {

using blockeig::Index;
using blockeig::Matrix;
using blockeig::Vector;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

/// n x k with orthonormal columns (Householder QR of a Gaussian block).
inline Matrix haar_columns(Index n, Index k, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, k, rng));
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Index j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

/// U diag(s) V^T with s log-spaced from 1 down to 1/cond.
inline Matrix conditioned_block(Index n, Index k, double cond, std::mt19937_64& rng) {
  const Matrix u = haar_columns(n, k, rng);
  const Matrix v = haar_columns(k, k, rng);
  Vector s(k);
  for (Index j = 0; j < k; ++j) {
    const double t = k > 1 ? static_cast<double>(j) / static_cast<double>(k - 1) : 0.0;
    s(j) = std::pow(cond, -t);
  }
  return u * s.asDiagonal() * v.transpose();
}

inline Matrix with_spectrum(const Vector& lambda, std::mt19937_64& rng) {
  const Matrix q = haar_columns(lambda.size(), lambda.size(), rng);
  Matrix a = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

/// SPD matrix with spectrum log-spaced in [1, cond].
inline Matrix spd(Index n, double cond, std::mt19937_64& rng) {
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    lambda(i) = std::pow(cond, t);
  }
  return with_spectrum(lambda, rng);
}

inline Vector dense_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline Vector dense_generalized_eigenvalues(const Matrix& a, const Matrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues();
}

/// Naive triple loop, independent of Eigen's product kernels.
inline Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (Index k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline double gram_error(const Matrix& x) {
  return (x.transpose() * x - Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

inline double b_gram_error(const Matrix& x, const Matrix& b) {
  return (x.transpose() * b * x - Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

/// Relative gap lambda_{k} - lambda_{k-1} (0-based k) of an ascending spectrum.
inline double gap_after(const Vector& lambda, Index k) { return lambda(k + 1) - lambda(k); }

}  // namespace testing_support
