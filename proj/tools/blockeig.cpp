#include "blockeig/cli/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace blockeig;
using namespace blockeig::cli;

int main(int argc, char** argv) {
  CLI::App app{"Block eigensolver harness: LOBPCG and block Davidson on generated or Matrix Market problems."};
  app.set_version_flag("--version", "blockeig 1.0");
  app.footer(std::string("Environment: ") + kThreadsEnv + "=<int> sets the dense-kernel thread count (default 1).");

  RunConfig cfg;
  std::string matrix, gen = "fci-like", solver = "lobpcg", precond = "diagonal";
  int restart_keep = 0;
  bool hessian = false;

  auto* matrix_opt = app.add_option("--matrix", matrix, "Matrix Market file (symmetric)")->check(CLI::ExistingFile);
  app.add_option("--gen", gen, "Generator: fci-like, scf-hessian-like, cas-hessian-like")->excludes(matrix_opt);
  app.add_option("--n", cfg.problem.n, "Generated problem dimension")->capture_default_str();
  app.add_option("--density", cfg.problem.density, "Off-diagonal fill fraction")->capture_default_str();
  app.add_option("--dominance", cfg.problem.dominance, "Diagonal dominance (inf for a diagonal matrix)")->capture_default_str();
  app.add_option("--gap", cfg.problem.gap_control, "Pack lambda_{nev+1..m+1} into this width (0: off)")->capture_default_str();
  app.add_option("--negatives", cfg.problem.negative_count, "Negative eigenvalues (scf-hessian-like)")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", cfg.seed, "Seed for the generator and the initial block")->capture_default_str();
  app.add_option("--solver", solver, "lobpcg or davidson")->capture_default_str();
  app.add_option("--nev", cfg.n_sought, "Eigenpairs to converge")->capture_default_str();
  app.add_option("--extra", cfg.n_extra, "Additional block columns")->capture_default_str();
  auto* tol_rms_opt = app.add_option("--tol-rms", cfg.tol_rms, "RMS residual threshold")->capture_default_str();
  auto* tol_max_opt = app.add_option("--tol-max", cfg.tol_max, "Max-abs residual threshold")->capture_default_str();
  app.add_flag("--hessian", hessian, "Use the Hessian thresholds (1e-7 rms, 1e-6 max) unless given explicitly");
  app.add_option("--precond", precond, "identity, diagonal, tridiagonal, sparse")->capture_default_str();
  app.add_option("--cap", cfg.davidson_cap, "Davidson basis columns per root")->capture_default_str();
  auto* keep_opt = app.add_option("--restart-keep", restart_keep, "Davidson blocks kept on restart (default 2, 1 when cap <= 3)");
  app.add_option("--max-iter", cfg.max_iter, "Iteration cap")->capture_default_str();
  app.add_option("--ortho-tol", cfg.ortho_tol, "Orthonormality tolerance")->capture_default_str();
  app.add_option("--trace-json", cfg.trace_json, "Write the convergence trace as JSON");
  app.add_option("--trace-csv", cfg.trace_csv, "Write the convergence trace as CSV");
  app.add_option("--eigvec-out", cfg.eigvec_out, "Write eigenvectors (Matrix Market array)");

  auto* cmp = app.add_subcommand("compare", "Run a solver x preconditioner grid on one problem");
  cmp->fallthrough();
  std::vector<std::string> solvers{"lobpcg", "davidson"};
  std::vector<std::string> preconds{"diagonal", "tridiagonal", "sparse"};
  std::string csv_path;
  cmp->add_option("--solvers", solvers, "Solvers to run")->delimiter(',')->capture_default_str();
  cmp->add_option("--preconds", preconds, "Preconditioners to run")->delimiter(',')->capture_default_str();
  cmp->add_option("--csv", csv_path, "Write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!matrix.empty()) {
      cfg.problem.kind = ProblemKind::file;
      cfg.problem.path = matrix;
    } else {
      cfg.problem.kind = parse_problem_kind(gen);
    }
    if (seed_opt->count()) cfg.problem.seed = cfg.seed;
    cfg.solver = parse_solver_kind(solver);
    cfg.precond = parse_precond_kind(precond);
    if (keep_opt->count()) cfg.restart_keep = restart_keep;
    if (hessian) {
      if (!tol_rms_opt->count()) cfg.tol_rms = RunConfig::hessian_tol_rms;
      if (!tol_max_opt->count()) cfg.tol_max = RunConfig::hessian_tol_max;
    }

    if (!*cmp) return run(cfg, std::cout, std::cerr);

    configure_threads();
    std::vector<RunConfig> configs;
    for (const auto& s : solvers) {
      for (const auto& p : preconds) {
        RunConfig c = cfg;
        c.solver = parse_solver_kind(s);
        c.precond = parse_precond_kind(p);
        c.trace_json.clear();
        c.trace_csv.clear();
        c.eigvec_out.clear();
        configs.push_back(std::move(c));
      }
    }
    const auto rows = compare(configs);
    std::cout << compare_table(rows);
    if (!csv_path.empty()) {
      std::ofstream f(csv_path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
      f << compare_csv(rows);
    }
    for (const auto& r : rows)
      if (!r.error.empty()) return 1;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
