#include "blockeig/convergence.hpp"

#include <cmath>
#include <string>

namespace blockeig {

void SolverOptions::validate(Index n) const {
  if (n_sought < 1) throw std::invalid_argument("n_sought must be >= 1");
  if (n_extra < 0) throw std::invalid_argument("n_extra must be >= 0");
  if (!(tol_rms > 0.0) || !(tol_max > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
  if (3 * static_cast<Index>(block_size()) > n) {
    throw std::invalid_argument("block size " + std::to_string(block_size()) + " exceeds n/3 for n = " +
                                std::to_string(n));
  }
  ortho.validate();
}

ConvergenceCheck check_convergence(const BlockVectors& r, const SolverOptions& opts) {
  ConvergenceCheck out;
  const Index k = r.cols();
  out.eligible.resize(static_cast<size_t>(k));
  out.column_rms.resize(k);
  out.column_max.resize(k);
  const double n = static_cast<double>(std::max<Index>(r.rows(), 1));
  for (Index j = 0; j < k; ++j) {
    out.column_rms(j) = r.col(j).norm() / std::sqrt(n);
    out.column_max(j) = r.rows() ? r.col(j).cwiseAbs().maxCoeff() : 0.0;
    out.eligible[static_cast<size_t>(j)] = out.column_rms(j) <= opts.tol_rms && out.column_max(j) <= opts.tol_max;
  }
  out.max_abs = max_abs(r);
  if (opts.rms_mode == RmsMode::block) out.rms = rms(r);
  else out.rms = k ? out.column_rms.maxCoeff() : 0.0;
  return out;
}

int lockable_prefix(const std::vector<bool>& eligible, int limit) {
  int count = 0;
  while (count < limit && count < static_cast<int>(eligible.size()) && eligible[static_cast<size_t>(count)]) ++count;
  return count;
}

}  // namespace blockeig
