#pragma once

#include "blockeig/convergence.hpp"
#include "blockeig/precond.hpp"
#include "blockeig/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace blockeig::cli {

enum class SolverKind { lobpcg, davidson };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

/// Environment variable read for the dense-kernel thread count (integer).
inline constexpr const char* kThreadsEnv = "BLOCKEIG_NUM_THREADS";

struct RunConfig {
  ProblemSpec problem;  ///< generator spec, or kind == file with a path
  SolverKind solver = SolverKind::lobpcg;
  int n_sought = 1;
  int n_extra = 5;
  double tol_rms = 1e-9;
  double tol_max = 1e-8;
  PrecondKind precond = PrecondKind::diagonal;
  int davidson_cap = 25;
  /// Unset: 2, or 1 when davidson_cap <= 3.
  std::optional<int> restart_keep;
  int max_iter = 100;
  double ortho_tol = 1e-14;
  unsigned long seed = 42;

  std::string trace_json;
  std::string trace_csv;
  std::string eigvec_out;

  static constexpr double hessian_tol_rms = 1e-7;
  static constexpr double hessian_tol_max = 1e-6;

  int effective_restart_keep() const;
  void validate() const;
};

struct RunOutcome {
  EigenResult result;
  std::string problem_description;
  int exit_code = 1;
};

/// Builds the problem and the preconditioner and runs the solver. Throws on
/// configuration, file or solver errors.
RunOutcome execute(const RunConfig& config);

/// execute() plus artifacts: trace files, eigenvector dump and a summary
/// on `out`. Returns 0 when converged, 2 when max_iter was hit, 1 on error
/// (message on `err`).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

std::string trace_json(const RunConfig& config, const RunOutcome& outcome);
std::string trace_csv(const ConvergenceTrace& trace);
std::string summary(const RunConfig& config, const RunOutcome& outcome);

struct CompareRow {
  SolverKind solver;
  PrecondKind precond;
  int davidson_cap;
  int iterations;
  long matvecs;
  bool converged;
  std::string error;  ///< non-empty when the run threw
};

/// Runs every config on the same problem and seed (configs may run
/// concurrently) and returns rows in input order. Throws
/// std::invalid_argument when the problems or seeds differ.
std::vector<CompareRow> compare(const std::vector<RunConfig>& configs);

std::string compare_table(const std::vector<CompareRow>& rows);
std::string compare_csv(const std::vector<CompareRow>& rows);

/// Applies kThreadsEnv (default 1) to Eigen.
void configure_threads();

}  // namespace blockeig::cli
