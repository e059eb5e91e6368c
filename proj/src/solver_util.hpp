#pragma once

// Helpers shared by the LOBPCG and Davidson drivers.

#include "blockeig/convergence.hpp"

#include <vector>

namespace blockeig::detail {

/// R = AX - MX diag(lambda), MX being X or B X.
inline Matrix residuals(const Matrix& ax, const Matrix& mx, const Vector& lambda) {
  return ax - mx * lambda.asDiagonal();
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Tracks per-iteration deltas of the ortho counters.
class OrthoDelta {
 public:
  explicit OrthoDelta(const OrthoStats& s) : stats_(s), last_(s) {}
  void take(IterationRecord& rec) {
    rec.ortho_passes = stats_.refine_rounds - last_.refine_rounds;
    rec.shifts_engaged = stats_.shifted_factorizations - last_.shifted_factorizations;
    last_ = stats_;
  }

 private:
  const OrthoStats& stats_;
  OrthoStats last_;
};

/// The columns of w that keep more than a tau fraction of their length
/// under X <- X - Y (MY)^T X. Zero residuals and directions already in the
/// basis add nothing and are left out of the expansion.
inline Matrix new_directions(const Matrix& w, const Matrix& y, const Matrix& my, double tau) {
  Matrix left = w;
  if (y.cols() > 0) left -= y * (my.transpose() * w);
  std::vector<Index> keep;
  for (Index j = 0; j < w.cols(); ++j) {
    if (left.col(j).norm() > tau * w.col(j).norm()) keep.push_back(j);
  }
  if (keep.size() == static_cast<size_t>(w.cols())) return w;
  Matrix out(w.rows(), static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = w.col(keep[j]);
  return out;
}

/// Fills residual norms for the returned pairs.
inline void finish_result(EigenResult& res, const Matrix& ax, const Matrix& mx, const Vector& lambda, const Matrix& x,
                          int n_sought) {
  res.eigenvalues = lambda.head(n_sought);
  res.eigenvectors = x.leftCols(n_sought);
  Matrix r = residuals(ax.leftCols(n_sought), mx.leftCols(n_sought), res.eigenvalues);
  const double n = static_cast<double>(std::max<Index>(r.rows(), 1));
  res.residual_rms.resize(n_sought);
  res.residual_max.resize(n_sought);
  for (int j = 0; j < n_sought; ++j) {
    res.residual_rms(j) = r.col(j).norm() / std::sqrt(n);
    res.residual_max(j) = r.col(j).cwiseAbs().maxCoeff();
  }
}

}  // namespace blockeig::detail
