#include "blockeig/davidson.hpp"

#include "blockeig/lobpcg.hpp"
#include "solver_util.hpp"

#include <algorithm>
#include <cassert>

namespace blockeig {

void DavidsonOptions::validate(Index n) const {
  SolverOptions::validate(n);
  if (max_space_per_root < 2) throw std::invalid_argument("max_space_per_root must be >= 2");
  if (restart_keep < 1 || restart_keep >= max_space_per_root) {
    throw std::invalid_argument("restart_keep must be in [1, max_space_per_root)");
  }
  if (static_cast<Index>(restart_keep + 1) * block_size() > n) {
    throw std::invalid_argument("(restart_keep + 1) * block size exceeds n");
  }
}

namespace {

class Davidson {
 public:
  Davidson(const Operator& a, const Preconditioner& precond, const DavidsonOptions& opts)
      : a_(a), precond_(precond), opts_(opts), delta_(ostats_) {}

  EigenResult run(const BlockVectors& x0);

 private:
  Matrix apply_a(const Matrix& x) {
    matvecs_ += x.cols();
    return a_.apply(x);
  }

  void record(int iter, const ConvergenceCheck& conv, const Vector& lambda, int subspace) {
    if (!opts_.record_trace) return;
    IterationRecord rec;
    rec.iter = iter;
    rec.ritz = detail::to_std(lambda);
    rec.rms = conv.rms;
    rec.max_abs = conv.max_abs;
    rec.locked = static_cast<int>(xl_.cols());
    rec.matvecs = matvecs_;
    rec.subspace = subspace;
    delta_.take(rec);
    if (opts_.check_reuse) {
      rec.reuse_error = std::max(max_abs(av_ - a_.apply(v_)), xl_.cols() ? max_abs(axl_ - a_.apply(xl_)) : 0.0);
      rec.basis_error = orthonormality_error(hcat(xl_, v_));
    }
    trace_.records.push_back(std::move(rec));
  }

  const Operator& a_;
  const Preconditioner& precond_;
  const DavidsonOptions& opts_;

  OrthoStats ostats_;
  detail::OrthoDelta delta_;
  long matvecs_ = 0;

  Matrix xl_, axl_;  // locked Ritz vectors and images
  Vector lambda_locked_;
  Matrix v_, av_;    // active basis, orthogonal to xl_
  ConvergenceTrace trace_;
};

EigenResult Davidson::run(const BlockVectors& x0) {
  const Index n = a_.dim();
  opts_.validate(n);
  const int m = opts_.block_size();
  const int sought = opts_.n_sought;
  if (x0.rows() != n || x0.cols() != m) {
    throw DimensionError("initial block must be " + std::to_string(n) + " x " + std::to_string(m));
  }
  const Index width_limit = std::min<Index>(static_cast<Index>(opts_.max_space_per_root) * m,
                                            std::max<Index>(n / 2, static_cast<Index>(opts_.restart_keep + 1) * m));

  try {
    v_ = ortho(x0, opts_.ortho, &ostats_);
  } catch (const OrthoFailed& e) {
    throw SolverError(std::string("initial block is rank deficient: ") + e.what(), 0);
  }
  av_ = apply_a(v_);
  xl_ = axl_ = Matrix(n, 0);
  lambda_locked_.resize(0);

  Matrix u_prev;  // previous Ritz vectors in the current basis coordinates
  Matrix xa, axa;
  Vector lambda_a;
  bool converged = false;
  int iter = 0;
  for (;; ++iter) {
    int active = m - static_cast<int>(xl_.cols());
    Index s = v_.cols();

    SymEig e = symeig(symmetrized(v_.transpose() * av_));
    Matrix ritz_coords = e.vectors;
    xa = v_ * ritz_coords.leftCols(active);
    axa = av_ * ritz_coords.leftCols(active);
    lambda_a = e.values.head(active);

    Vector lambda(m);
    lambda << lambda_locked_, lambda_a;

    Matrix r = detail::residuals(axa, xa, lambda_a);
    const int sought_active = sought - static_cast<int>(xl_.cols());
    ConvergenceCheck conv = check_convergence(r.leftCols(sought_active), opts_);
    const int newly = lockable_prefix(conv.eligible, sought_active);

    auto lock = [&](int c) {
      xl_ = hcat(xl_, xa.leftCols(c));
      axl_ = hcat(axl_, axa.leftCols(c));
      Vector ll(lambda_locked_.size() + c);
      ll << lambda_locked_, lambda_a.head(c);
      lambda_locked_ = ll;
    };

    if (static_cast<int>(xl_.cols()) + newly >= sought || iter >= opts_.max_iter) {
      const int c = std::min(newly, active);
      converged = static_cast<int>(xl_.cols()) + newly >= sought;
      lock(c);
      xa = xa.rightCols(active - c).eval();
      axa = axa.rightCols(active - c).eval();
      lambda_a = lambda_a.tail(active - c).eval();
      v_ = xa;
      av_ = axa;
      record(iter, conv, lambda, static_cast<int>(s));
      break;
    }

    if (newly > 0) {
      // Move the newly locked Ritz vectors out of the basis. The rest of
      // the Ritz basis becomes the new coordinate system.
      lock(newly);
      const Matrix q = ritz_coords.rightCols(s - newly);
      v_ = v_ * q;
      av_ = av_ * q;
      if (u_prev.cols() > 0) u_prev = (q.transpose() * u_prev.rightCols(active - newly)).eval();
      s -= newly;
      active -= newly;
      ritz_coords = Matrix::Identity(s, s);
      xa = xa.rightCols(active).eval();
      axa = axa.rightCols(active).eval();
      r = r.rightCols(active).eval();
      lambda_a = lambda_a.tail(active).eval();
    }
    Matrix cur = ritz_coords.leftCols(active);

    const Index nl = xl_.cols();
    if (nl + s + active > width_limit) {
      Matrix keep = cur;
      Matrix extra;
      const Index more = std::min<Index>(static_cast<Index>(opts_.restart_keep - 2) * active, s - active);
      if (opts_.restart_keep >= 2 && u_prev.cols() > 0) extra = u_prev;
      if (more > 0) extra = hcat(extra, ritz_coords.middleCols(active, more));
      if (extra.cols() > 0) {
        try {
          keep = hcat(keep, ortho_against(extra, cur, opts_.ortho, &ostats_));
        } catch (const OrthoFailed&) {
          if (more > 0) keep = hcat(keep, ritz_coords.middleCols(active, more));
        }
      }
      v_ = v_ * keep;
      av_ = av_ * keep;
      s = v_.cols();
      cur = Matrix::Identity(s, active);
    }

    Matrix wt = precond_.apply(r, lambda_a, conv.rms);
    if (!all_finite(wt)) throw SolverError("preconditioner produced non-finite values", iter);
    const Matrix basis = hcat(xl_, v_);
    wt = detail::new_directions(wt, basis, basis, opts_.ortho.tau_ortho);
    Matrix w;
    try {
      w = ortho_against(wt, basis, opts_.ortho, &ostats_);
    } catch (const OrthoFailed& ex) {
      throw SolverError(std::string("orthogonalization of preconditioned residuals failed: ") + ex.what(), iter);
    }
    Matrix aw = apply_a(w);
    v_ = hcat(v_, w);
    av_ = hcat(av_, aw);
    assert(xl_.cols() + v_.cols() <= static_cast<Index>(opts_.max_space_per_root) * m);

    u_prev = Matrix::Zero(v_.cols(), active);
    u_prev.topRows(s) = cur;
    record(iter, conv, lambda, static_cast<int>(s));
  }

  Matrix x = hcat(xl_, xa);
  Matrix ax = hcat(axl_, axa);
  Vector lambda(m);
  lambda << lambda_locked_, lambda_a;

  EigenResult res;
  res.converged = converged;
  res.stats.iterations = iter;
  res.stats.matvecs = matvecs_;
  res.stats.ortho = ostats_;
  res.stats.precond_fallbacks = precond_.fallback_count();
  detail::finish_result(res, ax, x, lambda, x, sought);
  if (opts_.record_trace) res.trace = std::move(trace_);
  return res;
}

}  // namespace

EigenResult davidson_solve(const Operator& a, const Preconditioner& precond, const BlockVectors& x0,
                           const DavidsonOptions& opts) {
  return Davidson(a, precond, opts).run(x0);
}

EigenResult davidson_solve(const Operator& a, const Preconditioner& precond, const DavidsonOptions& opts) {
  opts.validate(a.dim());
  return davidson_solve(a, precond, default_guess(a, opts.block_size(), opts.seed), opts);
}

}  // namespace blockeig
