#include "blockeig/problems.hpp"

#include "blockeig/matrix_market.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace blockeig {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::fci_like: return "fci-like";
    case ProblemKind::scf_hessian_like: return "scf-hessian-like";
    case ProblemKind::cas_hessian_like: return "cas-hessian-like";
    case ProblemKind::file: return "file";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "fci-like" || name == "fci_like" || name == "fci") return ProblemKind::fci_like;
  if (name == "scf-hessian-like" || name == "scf_hessian_like" || name == "scf" || name == "indefinite-hessian") {
    return ProblemKind::scf_hessian_like;
  }
  if (name == "cas-hessian-like" || name == "cas_hessian_like" || name == "cas") return ProblemKind::cas_hessian_like;
  if (name == "file") return ProblemKind::file;
  throw std::invalid_argument("unknown problem kind '" + name + "'");
}

void ProblemSpec::validate() const {
  if (kind == ProblemKind::file) {
    if (path.empty()) throw std::invalid_argument("file problem needs a path");
    return;
  }
  if (n < 10) throw std::invalid_argument("generated problems need n >= 10");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must be in [0, 1]");
  if (!(dominance > 0.0)) throw std::invalid_argument("dominance must be positive");
  if (!(gap_control >= 0.0)) throw std::invalid_argument("gap_control must be non-negative");
  if (negative_count < 0 || negative_count > n) throw std::invalid_argument("negative_count out of range");
  if (n_sought < 1 || n_extra < 0 || n_sought + n_extra + 1 > n) {
    throw std::invalid_argument("n_sought / n_extra out of range");
  }
}

Matrix cayley_rotation(Index n, double sigma, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix s = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double v = sigma * dist(rng);
      s(i, j) = v;
      s(j, i) = -v;
    }
  }
  const Matrix id = Matrix::Identity(n, n);
  return (id - s).partialPivLu().solve(id + s);
}

namespace {

Matrix similarity(const Matrix& q, const Vector& lambda) {
  return symmetrized(q * lambda.asDiagonal() * q.transpose());
}

// Packs eigenvalues n_sought .. m (0-based) into a window of width gap above
// lambda[n_sought - 1]; the ones above are shifted rigidly to stay above.
void apply_gap_control(Vector& lambda, const ProblemSpec& spec) {
  if (!(spec.gap_control > 0.0)) return;
  const Index lo = spec.n_sought - 1;
  const Index hi = spec.n_sought + spec.n_extra;  // 0-based index of lambda_{m+1}
  if (hi >= lambda.size()) return;
  const double old_top = lambda(hi);
  const double span = static_cast<double>(hi - lo);
  for (Index i = lo + 1; i <= hi; ++i) {
    lambda(i) = lambda(lo) + spec.gap_control * static_cast<double>(i - lo) / span;
  }
  const double offset = lambda(hi) - old_top;
  for (Index i = hi + 1; i < lambda.size(); ++i) lambda(i) += offset;
  for (Index i = hi + 1; i < lambda.size(); ++i) lambda(i) = std::max(lambda(i), lambda(i - 1) + 1e-3);
}

}  // namespace

Operator gen_fci_like(const ProblemSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  const double pairs = spec.density * static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  if (pairs > 5e7) throw std::invalid_argument("gen_fci_like: density * n^2 too large for the generator");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spread = 10.0;
  const double spacing = spread / static_cast<double>(n);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(n + 2 * pairs));
  for (Index i = 0; i < n; ++i) {
    entries.emplace_back(i, i, 1.0 + spacing * (static_cast<double>(i) + 0.5 * unit(rng)));
  }
  if (std::isfinite(spec.dominance)) {
    const double bound = spacing / spec.dominance;
    std::uniform_int_distribution<Index> pick(0, n - 1);
    const auto count = static_cast<long long>(std::llround(pairs));
    std::vector<std::pair<std::pair<Index, Index>, double>> offdiag;
    offdiag.reserve(static_cast<size_t>(count));
    for (long long t = 0; t < count; ++t) {
      const Index i = pick(rng), j = pick(rng);
      const double v = bound * (2.0 * unit(rng) - 1.0);
      if (i != j) offdiag.push_back({{std::max(i, j), std::min(i, j)}, v});
    }
    // first draw wins on repeated pairs
    std::stable_sort(offdiag.begin(), offdiag.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    offdiag.erase(std::unique(offdiag.begin(), offdiag.end(), [](const auto& x, const auto& y) { return x.first == y.first; }),
                  offdiag.end());
    for (const auto& [ij, v] : offdiag) {
      entries.emplace_back(ij.first, ij.second, v);
      entries.emplace_back(ij.second, ij.first, v);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return Operator::from_sparse(std::move(a));
}

Problem gen_from_spectrum(const Vector& lambda, double mixing, unsigned long seed) {
  const Index n = lambda.size();
  if (n < 1) throw std::invalid_argument("gen_from_spectrum: empty spectrum");
  const double sigma = mixing / std::sqrt(static_cast<double>(n));
  Matrix q = cayley_rotation(n, sigma, seed);
  Vector sorted = lambda;
  std::sort(sorted.data(), sorted.data() + n);
  std::ostringstream desc;
  desc << "prescribed spectrum, n=" << n << ", mixing=" << mixing;
  return {Operator::from_dense(similarity(q, lambda)), sorted, desc.str()};
}

Problem gen_indefinite_hessian(const ProblemSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  const Index neg = spec.negative_count;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Vector lambda(n);
  for (Index i = 0; i < neg; ++i) {
    lambda(i) = -2.0 + 1.5 * (static_cast<double>(i) + 0.5 * unit(rng)) / static_cast<double>(neg);
  }
  // Positive part clusters quadratically towards 0.1.
  const Index pos = n - neg;
  for (Index i = 0; i < pos; ++i) {
    const double t = (static_cast<double>(i) + 0.5 * unit(rng)) / static_cast<double>(pos);
    lambda(neg + i) = 0.1 + 10.0 * t * t;
  }
  std::sort(lambda.data(), lambda.data() + n);
  apply_gap_control(lambda, spec);

  // Random placement on the diagonal before rotating, so the diagonal is
  // not sorted like the spectrum.
  std::vector<Index> perm(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Vector placed(n);
  for (Index i = 0; i < n; ++i) placed(perm[static_cast<size_t>(i)]) = lambda(i);

  Problem p = gen_from_spectrum(placed, 1.0 / spec.dominance, spec.seed + 7919);
  std::ostringstream desc;
  desc << "scf-hessian-like n=" << n << " negatives=" << neg << " dominance=" << spec.dominance;
  p.description = desc.str();
  return p;
}

Problem gen_cas_hessian_like(const ProblemSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  const Index no = std::max<Index>(spec.n_sought + spec.n_extra + 1, n / 5);  // orbital block
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Orbital block D^{1/2} C D^{1/2}: unit diagonal C with strong couplings
  // 0.7 .. 0.98 on a random pairing and a weak dense background. The pairs
  // are what makes the block ill conditioned.
  Vector d(n);
  for (Index i = 0; i < no; ++i) d(i) = 0.3 * std::pow(20.0 / 0.3, unit(rng));
  for (Index i = no; i < n; ++i) {
    d(i) = 1.0 + 10.0 * (static_cast<double>(i - no) + 0.5 * unit(rng)) / static_cast<double>(n - no);
  }
  Matrix c = Matrix::Identity(n, n);
  std::vector<Index> perm(static_cast<size_t>(no));
  for (Index i = 0; i < no; ++i) perm[static_cast<size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (size_t k = 0; k + 1 < perm.size(); k += 2) {
    const double v = (0.7 + 0.28 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    c(perm[k], perm[k + 1]) = c(perm[k + 1], perm[k]) = v;
  }
  const double background = 0.03 / std::sqrt(static_cast<double>(no));
  for (Index j = 0; j < no; ++j) {
    for (Index i = j + 1; i < no; ++i) {
      if (c(i, j) == 0.0) c(i, j) = c(j, i) = background * normal(rng);
    }
  }
  const Vector root = d.cwiseSqrt();
  Matrix a = symmetrized(root.asDiagonal() * c * root.asDiagonal());

  // CI rows: sparse and weak, coupled to everything.
  const double weak = 0.02 / spec.dominance;
  for (Index j = 0; j < n; ++j) {
    for (Index i = std::max(j + 1, no); i < n; ++i) {
      if (unit(rng) < spec.density) {
        const double v = weak * (2.0 * unit(rng) - 1.0);
        a(i, j) += v;
        a(j, i) += v;
      }
    }
  }

  std::ostringstream desc;
  desc << "cas-hessian-like n=" << n << " orbital block=" << no << " dominance=" << spec.dominance;
  return {Operator::from_dense(a), std::nullopt, desc.str()};
}

Problem make_problem(const ProblemSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ProblemKind::fci_like: {
      std::ostringstream desc;
      desc << "fci-like n=" << spec.n << " density=" << spec.density << " dominance=" << spec.dominance;
      return {gen_fci_like(spec), std::nullopt, desc.str()};
    }
    case ProblemKind::scf_hessian_like: return gen_indefinite_hessian(spec);
    case ProblemKind::cas_hessian_like: return gen_cas_hessian_like(spec);
    case ProblemKind::file: return {read_matrix_market(spec.path), std::nullopt, "file " + spec.path};
  }
  throw std::invalid_argument("unknown problem kind");
}

}  // namespace blockeig
