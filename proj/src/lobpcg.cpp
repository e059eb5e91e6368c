#include "blockeig/lobpcg.hpp"

#include "solver_util.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace blockeig {

BlockVectors default_guess(const Operator& a, int m, unsigned long seed) {
  const Index n = a.dim();
  if (m < 1 || m > n) throw std::invalid_argument("default_guess: block size out of range");
  BlockVectors x = Matrix::Zero(n, m);
  if (a.diagonal()) {
    const Vector& d = *a.diagonal();
    std::vector<Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index i, Index j) { return d(i) < d(j); });
    for (int j = 0; j < m; ++j) x(idx[static_cast<size_t>(j)], j) = 1.0;
    return x;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = dist(rng);
  return ortho(x);
}

Matrix build_p_coefficients(const Matrix& u_x, int n_locked) {
  const Index m = u_x.cols();
  if (n_locked < 0 || n_locked > m) throw std::invalid_argument("build_p_coefficients: n_locked out of range");
  if (u_x.rows() < m) throw DimensionError("build_p_coefficients: u_x must have at least as many rows as columns");
  const Index active = m - n_locked;
  Matrix up = u_x.rightCols(active);
  for (Index j = 0; j < active; ++j) up(n_locked + j, j) -= 1.0;
  return up;
}

namespace {

class Lobpcg {
 public:
  Lobpcg(const Operator& a, const Operator* b, const Preconditioner& precond, const SolverOptions& opts)
      : a_(a), b_(b), precond_(precond), opts_(opts), delta_(ostats_) {}

  EigenResult run(const BlockVectors& x0);

 private:
  Matrix apply_a(const Matrix& x) {
    matvecs_ += x.cols();
    return a_.apply(x);
  }

  // Mass-weighted images: B X in generalized mode, X itself otherwise.
  const Matrix& metric(const Matrix& x, const Matrix& bx) const { return b_ ? bx : x; }

  void orthonormalize_initial(const BlockVectors& x0);
  void build_w(const Matrix& r_active, const Vector& shifts, double rms, int iter);
  double reuse_error() const;
  double basis_error() const;
  void record(int iter, const ConvergenceCheck& conv, int subspace);

  const Operator& a_;
  const Operator* b_;
  const Preconditioner& precond_;
  const SolverOptions& opts_;

  OrthoStats ostats_;
  detail::OrthoDelta delta_;
  long matvecs_ = 0;
  bool p_dropped_ = false;

  int nl_ = 0;  // locked prefix
  Vector lambda_;
  Matrix x_, ax_, bx_;
  Matrix w_, aw_, bw_;
  Matrix p_, ap_, bp_;
  ConvergenceTrace trace_;
};

void Lobpcg::orthonormalize_initial(const BlockVectors& x0) {
  if (b_) {
    auto r = ortho_b(x0, *b_, opts_.ortho, &ostats_);
    x_ = std::move(r.x);
    bx_ = std::move(r.bx);
  } else {
    x_ = ortho(x0, opts_.ortho, &ostats_);
  }
  ax_ = apply_a(x_);

  SymEig e = symeig(symmetrized(x_.transpose() * ax_));
  x_ = x_ * e.vectors;
  ax_ = ax_ * e.vectors;
  if (b_) bx_ = bx_ * e.vectors;
  lambda_ = e.values;
}

void Lobpcg::build_w(const Matrix& r_active, const Vector& shifts, double rms, int iter) {
  Matrix wt = precond_.apply(r_active, shifts, rms);
  if (!all_finite(wt)) throw SolverError("preconditioner produced non-finite values", iter);
  if (b_) {
    wt = detail::new_directions(wt, hcat(x_, p_), hcat(bx_, bp_), opts_.ortho.tau_ortho_b);
  } else {
    const Matrix y = hcat(x_, p_);
    wt = detail::new_directions(wt, y, y, opts_.ortho.tau_ortho);
  }
  try {
    if (b_) {
      auto r = ortho_against_b(wt, hcat(x_, p_), hcat(bx_, bp_), *b_, opts_.ortho, &ostats_);
      w_ = std::move(r.x);
      bw_ = std::move(r.bx);
    } else {
      w_ = ortho_against(wt, hcat(x_, p_), opts_.ortho, &ostats_);
    }
  } catch (const OrthoFailed& e) {
    throw SolverError(std::string("orthogonalization of preconditioned residuals failed: ") + e.what(), iter);
  }
  aw_ = apply_a(w_);
}

double Lobpcg::reuse_error() const {
  double err = 0.0;
  auto check = [&](const Matrix& v, const Matrix& av, const Operator& op) {
    if (v.cols() > 0) err = std::max(err, max_abs(av - op.apply(v)));
  };
  check(x_, ax_, a_);
  check(w_, aw_, a_);
  check(p_, ap_, a_);
  if (b_) {
    check(x_, bx_, *b_);
    check(w_, bw_, *b_);
    check(p_, bp_, *b_);
  }
  return err;
}

double Lobpcg::basis_error() const {
  Matrix v = hcat(hcat(x_, w_), p_);
  if (!b_) return orthonormality_error(v);
  Matrix bv = hcat(hcat(bx_, bw_), bp_);
  return max_abs(v.transpose() * bv - Matrix::Identity(v.cols(), v.cols()));
}

void Lobpcg::record(int iter, const ConvergenceCheck& conv, int subspace) {
  if (!opts_.record_trace) return;
  IterationRecord rec;
  rec.iter = iter;
  rec.ritz = detail::to_std(lambda_);
  rec.rms = conv.rms;
  rec.max_abs = conv.max_abs;
  rec.locked = nl_;
  rec.matvecs = matvecs_;
  rec.bmatvecs = ostats_.b_applications;
  rec.subspace = subspace;
  delta_.take(rec);
  if (opts_.check_reuse) {
    rec.reuse_error = reuse_error();
    rec.basis_error = basis_error();
  }
  trace_.records.push_back(std::move(rec));
}

EigenResult Lobpcg::run(const BlockVectors& x0) {
  const Index n = a_.dim();
  opts_.validate(n);
  const int m = opts_.block_size();
  const int sought = opts_.n_sought;
  if (x0.rows() != n || x0.cols() != m) {
    throw DimensionError("initial block must be " + std::to_string(n) + " x " + std::to_string(m));
  }
  if (b_ && b_->dim() != n) throw DimensionError("B dimension does not match A");

  try {
    orthonormalize_initial(x0);
  } catch (const OrthoFailed& e) {
    throw SolverError(std::string("initial block is rank deficient: ") + e.what(), 0);
  }
  p_ = ap_ = bp_ = Matrix(n, 0);

  EigenResult res;
  bool converged = false;
  int iter = 0;
  for (;; ++iter) {
    const int active = m - nl_;
    Matrix ux;      // Ritz coefficients in V = (X_act, W, P)
    Matrix v, av, bv;
    int subspace = active;

    if (iter > 0) {
      // Rayleigh-Ritz in V
      v = hcat(hcat(x_.rightCols(active), w_), p_);
      av = hcat(hcat(ax_.rightCols(active), aw_), ap_);
      if (b_) bv = hcat(hcat(bx_.rightCols(active), bw_), bp_);
      subspace = static_cast<int>(v.cols());

      SymEig e = symeig(symmetrized(v.transpose() * av));
      ux = e.vectors.leftCols(active);
      x_.rightCols(active) = v * ux;
      ax_.rightCols(active) = av * ux;
      if (b_) bx_.rightCols(active) = bv * ux;
      lambda_.tail(active) = e.values.head(active);
    }

    Matrix r = detail::residuals(ax_.rightCols(active), metric(x_, bx_).rightCols(active), lambda_.tail(active));
    const int sought_active = sought - nl_;
    ConvergenceCheck conv = check_convergence(r.leftCols(sought_active), opts_);
    const int newly = lockable_prefix(conv.eligible, sought_active);

    if (nl_ + newly >= sought || iter >= opts_.max_iter) {
      // W and P belong to the previous X and are not extended any more.
      nl_ += newly;
      converged = nl_ >= sought;
      w_ = aw_ = bw_ = p_ = ap_ = bp_ = Matrix(n, 0);
      record(iter, conv, subspace);
      break;
    }

    // P for the columns that stay active, built in coefficient space
    // before locking shrinks the block.
    if (iter > 0) {
      Matrix up_tilde = build_p_coefficients(ux, newly);
      try {
        Matrix up = ortho_against(up_tilde, ux, opts_.ortho, &ostats_);
        p_ = v * up;
        ap_ = av * up;
        if (b_) bp_ = bv * up;
      } catch (const OrthoFailed&) {
        // X did not move: run this step without P, as in the first one.
        p_ = ap_ = bp_ = Matrix(n, 0);
        p_dropped_ = true;
      }
    }

    nl_ += newly;
    const int still_active = m - nl_;
    build_w(r.rightCols(still_active), lambda_.tail(still_active), conv.rms, iter);
    record(iter, conv, subspace);
  }

  res.converged = converged;
  res.stats.iterations = iter;
  res.stats.matvecs = matvecs_;
  res.stats.bmatvecs = ostats_.b_applications;
  res.stats.ortho = ostats_;
  res.stats.precond_fallbacks = precond_.fallback_count();
  res.stats.p_dropped = p_dropped_;
  detail::finish_result(res, ax_, metric(x_, bx_), lambda_, x_, sought);
  if (opts_.record_trace) res.trace = std::move(trace_);
  return res;
}

}  // namespace

EigenResult lobpcg_solve(const Operator& a, const Preconditioner& precond, const BlockVectors& x0,
                         const SolverOptions& opts) {
  return Lobpcg(a, nullptr, precond, opts).run(x0);
}

EigenResult lobpcg_solve(const Operator& a, const Preconditioner& precond, const SolverOptions& opts) {
  opts.validate(a.dim());
  return lobpcg_solve(a, precond, default_guess(a, opts.block_size(), opts.seed), opts);
}

EigenResult lobpcg_solve_generalized(const Operator& a, const Operator& b, const Preconditioner& precond,
                                     const BlockVectors& x0, const SolverOptions& opts) {
  return Lobpcg(a, &b, precond, opts).run(x0);
}

}  // namespace blockeig
