#include "blockeig/precond.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <iostream>
#include <optional>
#include <vector>

namespace blockeig {

std::string to_string(PrecondKind kind) {
  switch (kind) {
    case PrecondKind::identity: return "identity";
    case PrecondKind::diagonal: return "diagonal";
    case PrecondKind::tridiagonal: return "tridiagonal";
    case PrecondKind::sparse_threshold: return "sparse";
  }
  return "unknown";
}

PrecondKind parse_precond_kind(const std::string& name) {
  if (name == "identity" || name == "none") return PrecondKind::identity;
  if (name == "diagonal" || name == "diag" || name == "jacobi") return PrecondKind::diagonal;
  if (name == "tridiagonal" || name == "tridiag") return PrecondKind::tridiagonal;
  if (name == "sparse" || name == "sparse-threshold" || name == "sparse_threshold" || name == "ilu") {
    return PrecondKind::sparse_threshold;
  }
  throw std::invalid_argument("unknown preconditioner kind '" + name + "'");
}

void SparseThresholdSpec::validate() const {
  if (!(tol_refined < tol_initial)) throw std::invalid_argument("sparse threshold: tol_refined must be < tol_initial");
  if (!(tol_refined >= 0.0)) throw std::invalid_argument("sparse threshold: tolerances must be non-negative");
  if (!(switch_factor > 0.0)) throw std::invalid_argument("sparse threshold: switch_factor must be positive");
}

double clamp_floor(const Vector& diag) {
  const double scale = diag.size() == 0 ? 0.0 : diag.cwiseAbs().maxCoeff();
  return scale > 0.0 ? 1e-6 * scale : 1e-6;
}

namespace {

double clamped(double d, double floor) {
  if (std::abs(d) >= floor) return d;
  return d < 0.0 ? -floor : floor;
}

// Gaussian elimination with partial pivoting on a tridiagonal system, in the
// manner of LAPACK dgtsv. Returns nullopt on a (numerically) zero pivot.
std::optional<Vector> solve_tridiagonal(Vector dl, Vector d, Vector du, Vector b) {
  const Index n = d.size();
  if (n == 0) return b;
  const double scale = std::max({d.cwiseAbs().maxCoeff(), dl.size() ? dl.cwiseAbs().maxCoeff() : 0.0,
                                 du.size() ? du.cwiseAbs().maxCoeff() : 0.0});
  const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  Vector du2 = Vector::Zero(n);

  for (Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d(i)) >= std::abs(dl(i))) {
      // no row interchange
      if (std::abs(d(i)) <= tiny) return std::nullopt;
      const double fact = dl(i) / d(i);
      d(i + 1) -= fact * du(i);
      b(i + 1) -= fact * b(i);
      dl(i) = 0.0;
    } else {
      // interchange rows i and i+1
      const double fact = d(i) / dl(i);
      d(i) = dl(i);
      const double temp = d(i + 1);
      d(i + 1) = du(i) - fact * temp;
      if (i + 2 < n) {
        dl(i) = du(i + 1);
        du(i + 1) = -fact * dl(i);
      }
      du(i) = temp;
      const double tb = b(i);
      b(i) = b(i + 1);
      b(i + 1) = tb - fact * b(i + 1);
      du2(i) = i + 2 < n ? dl(i) : 0.0;
    }
  }
  if (std::abs(d(n - 1)) <= tiny) return std::nullopt;

  b(n - 1) /= d(n - 1);
  if (n > 1) b(n - 2) = (b(n - 2) - du(n - 2) * b(n - 1)) / d(n - 2);
  for (Index i = n - 3; i >= 0; --i) {
    b(i) = (b(i) - du(i) * b(i + 1) - du2(i) * b(i + 2)) / d(i);
  }
  if (!b.allFinite()) return std::nullopt;
  return b;
}

}  // namespace

Matrix diag_precond(const Vector& diag, const Matrix& r, const Vector& shifts) {
  if (diag.size() != r.rows()) throw DimensionError("diag_precond: diagonal length mismatch");
  if (shifts.size() != r.cols()) throw DimensionError("diag_precond: one shift per column required");
  const double floor = clamp_floor(diag);
  Matrix out(r.rows(), r.cols());
  for (Index j = 0; j < r.cols(); ++j) {
    for (Index i = 0; i < r.rows(); ++i) out(i, j) = r(i, j) / clamped(diag(i) - shifts(j), floor);
  }
  return out;
}

Matrix tridiag_precond(const Vector& lower, const Vector& main, const Vector& upper, const Matrix& r,
                       const Vector& shifts, long* fallbacks) {
  const Index n = main.size();
  if (r.rows() != n) throw DimensionError("tridiag_precond: row mismatch");
  if (n > 0 && (lower.size() != n - 1 || upper.size() != n - 1)) {
    throw DimensionError("tridiag_precond: off-diagonals must have length n-1");
  }
  if (shifts.size() != r.cols()) throw DimensionError("tridiag_precond: one shift per column required");

  const double floor = clamp_floor(main);
  Matrix out(n, r.cols());
  for (Index j = 0; j < r.cols(); ++j) {
    auto solved = solve_tridiagonal(lower, main.array() - shifts(j), upper, r.col(j));
    if (!solved) solved = solve_tridiagonal(lower, main.array() - (shifts(j) - floor), upper, r.col(j));
    if (solved) {
      out.col(j) = *solved;
    } else {
      if (fallbacks) ++*fallbacks;
      std::clog << "blockeig: tridiagonal system singular for column " << j << ", using diagonal scaling\n";
      Vector s(1);
      s(0) = shifts(j);
      out.col(j) = diag_precond(main, r.col(j), s);
    }
  }
  return out;
}

SparseMatrix threshold_matrix(const SparseMatrix& a, double tol) {
  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(static_cast<size_t>(a.nonZeros()));
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() == it.col() || std::abs(it.value()) > tol) kept.emplace_back(it.row(), it.col(), it.value());
    }
  }
  SparseMatrix m(a.rows(), a.cols());
  m.setFromTriplets(kept.begin(), kept.end());
  return m;
}

class Preconditioner::Impl {
 public:
  explicit Impl(PrecondKind kind) : kind(kind) {}
  virtual ~Impl() = default;
  virtual Matrix apply(const Matrix& r, const Vector& shifts, double residual_rms) const = 0;
  virtual bool uses_refined(double) const { return false; }

  PrecondKind kind;
  mutable std::atomic<long> fallbacks{0};
};

namespace {

class IdentityImpl final : public Preconditioner::Impl {
 public:
  IdentityImpl() : Impl(PrecondKind::identity) {}
  Matrix apply(const Matrix& r, const Vector&, double) const override { return r; }
};

class DiagonalImpl final : public Preconditioner::Impl {
 public:
  explicit DiagonalImpl(Vector d) : Impl(PrecondKind::diagonal), diag(std::move(d)) {}
  Matrix apply(const Matrix& r, const Vector& shifts, double) const override {
    return diag_precond(diag, r, shifts);
  }
  Vector diag;
};

class TridiagonalImpl final : public Preconditioner::Impl {
 public:
  TridiagonalImpl(Vector l, Vector d, Vector u)
      : Impl(PrecondKind::tridiagonal), lower(std::move(l)), main(std::move(d)), upper(std::move(u)) {}
  Matrix apply(const Matrix& r, const Vector& shifts, double) const override {
    long fb = 0;
    Matrix out = tridiag_precond(lower, main, upper, r, shifts, &fb);
    fallbacks += fb;
    return out;
  }
  Vector lower, main, upper;
};

class SparseThresholdImpl final : public Preconditioner::Impl {
 public:
  using Solver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

  SparseThresholdImpl(const SparseMatrix& a, const SparseThresholdSpec& s, double tol_rms)
      : Impl(PrecondKind::sparse_threshold), spec(s), switch_rms(s.switch_factor * tol_rms), diag(a.diagonal()) {
    initial = factorize(threshold_matrix(a, spec.tol_initial));
    refined = factorize(threshold_matrix(a, spec.tol_refined));
  }

  static std::shared_ptr<Solver> factorize(const SparseMatrix& m) {
    auto solver = std::make_shared<Solver>();
    SparseMatrix mc = m;
    mc.makeCompressed();
    solver->compute(mc);
    if (solver->info() != Eigen::Success) {
      std::clog << "blockeig: sparse threshold factorization failed, using diagonal scaling\n";
      return nullptr;
    }
    return solver;
  }

  bool uses_refined(double residual_rms) const override { return residual_rms < switch_rms; }

  Matrix apply(const Matrix& r, const Vector& shifts, double residual_rms) const override {
    const auto& solver = uses_refined(residual_rms) ? refined : initial;
    if (solver) {
      Matrix w = solver->solve(r);
      if (solver->info() == Eigen::Success && all_finite(w)) return w;
    }
    fallbacks += r.cols();
    return diag_precond(diag, r, shifts);
  }

  SparseThresholdSpec spec;
  double switch_rms;
  Vector diag;
  std::shared_ptr<Solver> initial, refined;
};

}  // namespace

Preconditioner Preconditioner::identity() { return Preconditioner(std::make_shared<IdentityImpl>()); }

Preconditioner Preconditioner::diagonal(Vector diag) {
  return Preconditioner(std::make_shared<DiagonalImpl>(std::move(diag)));
}

Preconditioner Preconditioner::tridiagonal(Vector lower, Vector main, Vector upper) {
  if (main.size() > 0 && (lower.size() != main.size() - 1 || upper.size() != main.size() - 1)) {
    throw DimensionError("tridiagonal preconditioner: off-diagonals must have length n-1");
  }
  return Preconditioner(std::make_shared<TridiagonalImpl>(std::move(lower), std::move(main), std::move(upper)));
}

Preconditioner Preconditioner::sparse_threshold(const SparseMatrix& a, const SparseThresholdSpec& spec,
                                                double tol_rms) {
  spec.validate();
  if (a.rows() != a.cols()) throw DimensionError("sparse threshold preconditioner: matrix must be square");
  return Preconditioner(std::make_shared<SparseThresholdImpl>(a, spec, tol_rms));
}

Preconditioner Preconditioner::for_operator(PrecondKind kind, const Operator& a, double tol_rms,
                                            const SparseThresholdSpec& spec) {
  switch (kind) {
    case PrecondKind::identity: return identity();
    case PrecondKind::diagonal:
      if (!a.diagonal()) throw std::invalid_argument("diagonal preconditioner needs the operator diagonal");
      return diagonal(*a.diagonal());
    case PrecondKind::tridiagonal: {
      if (!a.has_entries()) throw std::invalid_argument("tridiagonal preconditioner needs explicit entries");
      const SparseMatrix s = a.sparse_entries();
      const Index n = s.rows();
      Vector lower = Vector::Zero(std::max<Index>(n - 1, 0));
      Vector upper = Vector::Zero(std::max<Index>(n - 1, 0));
      Vector main = Vector::Zero(n);
      for (Index k = 0; k < s.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
          if (it.row() == it.col()) main(it.row()) = it.value();
          else if (it.row() == it.col() + 1) lower(it.col()) = it.value();
          else if (it.col() == it.row() + 1) upper(it.row()) = it.value();
        }
      }
      return tridiagonal(std::move(lower), std::move(main), std::move(upper));
    }
    case PrecondKind::sparse_threshold:
      if (!a.has_entries()) throw std::invalid_argument("sparse threshold preconditioner needs explicit entries");
      return sparse_threshold(a.sparse_entries(), spec, tol_rms);
  }
  throw std::invalid_argument("unknown preconditioner kind");
}

PrecondKind Preconditioner::kind() const { return impl_->kind; }

Matrix Preconditioner::apply(const Matrix& r, const Vector& shifts, double residual_rms) const {
  if (shifts.size() != r.cols()) throw DimensionError("preconditioner: one shift per column required");
  return impl_->apply(r, shifts, residual_rms);
}

long Preconditioner::fallback_count() const { return impl_->fallbacks.load(); }

bool Preconditioner::uses_refined(double residual_rms) const { return impl_->uses_refined(residual_rms); }

}  // namespace blockeig
