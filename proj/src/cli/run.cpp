#include "blockeig/cli/run.hpp"

#include "blockeig/davidson.hpp"
#include "blockeig/lobpcg.hpp"
#include "blockeig/matrix_market.hpp"

#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace blockeig::cli {

std::string to_string(SolverKind kind) { return kind == SolverKind::lobpcg ? "lobpcg" : "davidson"; }

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "lobpcg") return SolverKind::lobpcg;
  if (name == "davidson") return SolverKind::davidson;
  throw std::invalid_argument("unknown solver '" + name + "' (expected lobpcg or davidson)");
}

int RunConfig::effective_restart_keep() const {
  if (restart_keep) return *restart_keep;
  return davidson_cap <= 3 ? 1 : 2;
}

void RunConfig::validate() const {
  if (n_sought < 1) throw std::invalid_argument("--nev must be at least 1");
  if (n_extra < 0) throw std::invalid_argument("--extra must be non-negative");
  if (!(tol_rms > 0.0) || !(tol_max > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("--max-iter must be at least 1");
  if (!(ortho_tol > 0.0)) throw std::invalid_argument("--ortho-tol must be positive");
  if (solver == SolverKind::davidson && davidson_cap < 2) throw std::invalid_argument("--cap must be at least 2");
}

void configure_threads() {
  int threads = 1;
  if (const char* env = std::getenv(kThreadsEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw std::invalid_argument(std::string(kThreadsEnv) + " must be a positive integer");
    }
    threads = static_cast<int>(v);
  }
  Eigen::setNbThreads(threads);
}

namespace {

ProblemSpec effective_problem(const RunConfig& c) {
  ProblemSpec p = c.problem;
  p.n_sought = c.n_sought;
  p.n_extra = c.n_extra;
  return p;
}

SolverOptions base_options(const RunConfig& c) {
  SolverOptions o;
  o.n_sought = c.n_sought;
  o.n_extra = c.n_extra;
  o.tol_rms = c.tol_rms;
  o.tol_max = c.tol_max;
  o.max_iter = c.max_iter;
  o.ortho.tau_ortho = c.ortho_tol;
  o.record_trace = true;
  o.seed = c.seed;
  return o;
}

EigenResult solve(const RunConfig& c, const Operator& op) {
  const SolverOptions base = base_options(c);
  const Preconditioner pre = Preconditioner::for_operator(c.precond, op, c.tol_rms);
  if (c.solver == SolverKind::lobpcg) return lobpcg_solve(op, pre, base);
  DavidsonOptions d;
  static_cast<SolverOptions&>(d) = base;
  d.max_space_per_root = c.davidson_cap;
  d.restart_keep = c.effective_restart_keep();
  return davidson_solve(op, pre, d);
}

bool same_problem(const RunConfig& a, const RunConfig& b) {
  const ProblemSpec& p = a.problem;
  const ProblemSpec& q = b.problem;
  if (p.kind != q.kind || a.seed != b.seed) return false;
  if (p.kind == ProblemKind::file) return p.path == q.path;
  return p.n == q.n && p.density == q.density && p.dominance == q.dominance && p.gap_control == q.gap_control &&
         p.negative_count == q.negative_count && p.seed == q.seed &&
         (p.gap_control == 0.0 || (a.n_sought == b.n_sought && a.n_extra == b.n_extra));
}

}  // namespace

RunOutcome execute(const RunConfig& config) {
  config.validate();
  const Problem problem = make_problem(effective_problem(config));
  RunOutcome out;
  out.problem_description = problem.description;
  out.result = solve(config, problem.op);
  out.exit_code = out.result.converged ? 0 : 2;
  return out;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    configure_threads();
    const RunOutcome outcome = execute(config);
    auto write_file = [](const std::string& path, const std::string& text) {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
      f << text;
    };
    if (!config.trace_json.empty()) write_file(config.trace_json, trace_json(config, outcome));
    if (!config.trace_csv.empty()) write_file(config.trace_csv, trace_csv(*outcome.result.trace));
    if (!config.eigvec_out.empty()) write_matrix_market_array(config.eigvec_out, outcome.result.eigenvectors);
    out << summary(config, outcome);
    return outcome.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

std::vector<CompareRow> compare(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("compare needs at least one configuration");
  for (const auto& c : configs) {
    if (!same_problem(configs.front(), c)) throw std::invalid_argument("compare: configurations use different problems or seeds");
    c.validate();
  }
  const Problem problem = make_problem(effective_problem(configs.front()));

  std::vector<std::future<CompareRow>> jobs;
  jobs.reserve(configs.size());
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&problem, c]() {
      CompareRow row{c.solver, c.precond, c.davidson_cap, 0, 0, false, {}};
      try {
        const EigenResult r = solve(c, problem.op);
        row.iterations = r.stats.iterations;
        row.matvecs = r.stats.matvecs;
        row.converged = r.converged;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  }
  std::vector<CompareRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace blockeig::cli
