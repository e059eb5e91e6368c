#include "blockeig/linops.hpp"

#include <cmath>
#include <limits>

namespace blockeig {

Operator::Operator(Index dim, ApplyFn apply) : dim_(dim), apply_(std::move(apply)) {
  if (dim <= 0) throw DimensionError("operator dimension must be positive");
  if (!apply_) throw std::invalid_argument("operator apply function is empty");
}

Operator Operator::from_dense(Matrix a) {
  if (a.rows() != a.cols()) throw DimensionError("dense operator must be square");
  auto stored = std::make_shared<const Matrix>(std::move(a));
  Operator op(stored->rows(), [stored](const Matrix& x) -> Matrix { return (*stored) * x; });
  op.dense_ = stored;
  op.diagonal_ = stored->diagonal();
  return op;
}

Operator Operator::from_sparse(SparseMatrix a) {
  if (a.rows() != a.cols()) throw DimensionError("sparse operator must be square");
  a.makeCompressed();
  auto stored = std::make_shared<const SparseMatrix>(std::move(a));
  Operator op(stored->rows(), [stored](const Matrix& x) -> Matrix { return (*stored) * x; });
  op.sparse_ = stored;
  op.diagonal_ = Vector(stored->diagonal());
  return op;
}

Operator Operator::identity(Index dim) {
  SparseMatrix id(dim, dim);
  id.setIdentity();
  return from_sparse(std::move(id));
}

Operator Operator::diagonal_matrix(const Vector& d) {
  SparseMatrix a(d.size(), d.size());
  a.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Index i = 0; i < d.size(); ++i) a.insert(i, i) = d(i);
  return from_sparse(std::move(a));
}

Matrix Operator::apply(const Matrix& x) const {
  if (x.rows() != dim_) {
    throw DimensionError("operator of dimension " + std::to_string(dim_) + " applied to block with " +
                         std::to_string(x.rows()) + " rows");
  }
  if (x.cols() == 0) return Matrix(dim_, 0);
  Matrix y = apply_(x);
  if (y.rows() != dim_ || y.cols() != x.cols()) throw DimensionError("operator returned a block of the wrong shape");
  return y;
}

void Operator::set_diagonal(Vector d) {
  if (d.size() != dim_) throw DimensionError("diagonal length does not match operator dimension");
  diagonal_ = std::move(d);
}

SparseMatrix Operator::sparse_entries() const {
  if (sparse_) return *sparse_;
  if (dense_) return dense_->sparseView();
  throw std::logic_error("operator is matrix-free; entries are not available");
}

Matrix Operator::dense_entries() const {
  if (dense_) return *dense_;
  if (sparse_) return Matrix(*sparse_);
  throw std::logic_error("operator is matrix-free; entries are not available");
}

std::optional<double> Operator::norm1() const {
  if (dense_) return dense_->cwiseAbs().rowwise().sum().maxCoeff();
  if (sparse_) {
    Vector sums = Vector::Zero(dim_);
    for (Index k = 0; k < sparse_->outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(*sparse_, k); it; ++it) sums(it.row()) += std::abs(it.value());
    return sums.maxCoeff();
  }
  return std::nullopt;
}

Matrix block_inner(const BlockVectors& x, const BlockVectors& y) {
  if (x.rows() != y.rows()) {
    throw DimensionError("block_inner: row mismatch (" + std::to_string(x.rows()) + " vs " +
                         std::to_string(y.rows()) + ")");
  }
  return x.transpose() * y;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

SymEig symeig(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symeig: matrix must be square");
  if (!all_finite(a)) throw NumericalError("symeig: non-finite entry in reduced matrix");
  if (a.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("symeig: dense eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

std::optional<Matrix> cholesky(const Matrix& m, double rel_floor) {
  if (m.rows() != m.cols()) throw DimensionError("cholesky: matrix must be square");
  if (!all_finite(m)) throw NumericalError("cholesky: non-finite entry");
  const Index k = m.rows();
  const double scale = k ? m.diagonal().cwiseAbs().maxCoeff() : 0.0;
  Matrix l = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > rel_floor * scale)) return std::nullopt;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Index i = j + 1; i < k; ++i) {
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

BlockVectors tri_solve_right(const BlockVectors& x, const Matrix& l) {
  if (l.rows() != l.cols() || l.cols() != x.cols()) throw DimensionError("tri_solve_right: shape mismatch");
  for (Index i = 0; i < l.rows(); ++i) {
    if (l(i, i) == 0.0) throw NumericalError("tri_solve_right: zero diagonal entry in triangular factor");
  }
  // Y L^T = X  <=>  L Y^T = X^T
  Matrix yt = l.triangularView<Eigen::Lower>().solve(x.transpose());
  return yt.transpose();
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double rms(const Matrix& a) {
  return a.size() == 0 ? 0.0 : std::sqrt(a.squaredNorm() / static_cast<double>(a.size()));
}

double orthonormality_error(const BlockVectors& x) {
  if (x.cols() == 0) return 0.0;
  return max_abs(x.transpose() * x - Matrix::Identity(x.cols(), x.cols()));
}

bool all_finite(const Matrix& a) { return a.size() == 0 || a.allFinite(); }

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw DimensionError("hcat: row mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace blockeig
