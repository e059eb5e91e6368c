#include "blockeig/cli/run.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

namespace blockeig::cli {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string precond_label(const CompareRow& row) {
  return to_string(row.precond);
}

std::string solver_label(const CompareRow& row) {
  if (row.solver == SolverKind::davidson) return "davidson(cap " + std::to_string(row.davidson_cap) + ")";
  return "lobpcg";
}

std::string status(const CompareRow& row) {
  if (!row.error.empty()) return "error";
  return row.converged ? "yes" : "no";
}

}  // namespace

std::string trace_json(const RunConfig& config, const RunOutcome& outcome) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["schema"] = 1;
  doc["problem"] = outcome.problem_description;
  doc["solver"] = to_string(config.solver);
  doc["precond"] = to_string(config.precond);
  if (config.solver == SolverKind::davidson) {
    doc["davidson_cap"] = config.davidson_cap;
    doc["restart_keep"] = config.effective_restart_keep();
  }
  doc["n_sought"] = config.n_sought;
  doc["n_extra"] = config.n_extra;
  doc["tol_rms"] = config.tol_rms;
  doc["tol_max"] = config.tol_max;
  doc["seed"] = config.seed;
  doc["converged"] = outcome.result.converged;
  doc["iterations"] = outcome.result.stats.iterations;
  doc["matvecs"] = outcome.result.stats.matvecs;
  doc["eigenvalues"] = std::vector<double>(outcome.result.eigenvalues.data(),
                                           outcome.result.eigenvalues.data() + outcome.result.eigenvalues.size());
  ordered_json records = ordered_json::array();
  if (outcome.result.trace) {
    for (const auto& r : outcome.result.trace->records) {
      ordered_json rec;
      rec["iter"] = r.iter;
      rec["ritz"] = r.ritz;
      rec["rms"] = r.rms;
      rec["max_abs"] = r.max_abs;
      rec["locked"] = r.locked;
      rec["matvecs"] = r.matvecs;
      rec["ortho_passes"] = r.ortho_passes;
      rec["shifts_engaged"] = r.shifts_engaged;
      records.push_back(std::move(rec));
    }
  }
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

std::string trace_csv(const ConvergenceTrace& trace) {
  std::size_t width = 0;
  for (const auto& r : trace.records) width = std::max(width, r.ritz.size());
  std::ostringstream os;
  os << "iter,rms,max_abs,locked,matvecs,ortho_passes,shifts_engaged";
  for (std::size_t k = 0; k < width; ++k) os << ",ritz_" << (k + 1);
  os << '\n';
  for (const auto& r : trace.records) {
    os << r.iter << ',' << g17(r.rms) << ',' << g17(r.max_abs) << ',' << r.locked << ',' << r.matvecs << ','
       << r.ortho_passes << ',' << r.shifts_engaged;
    for (std::size_t k = 0; k < width; ++k) {
      os << ',';
      if (k < r.ritz.size()) os << g17(r.ritz[k]);
    }
    os << '\n';
  }
  return os.str();
}

std::string summary(const RunConfig& config, const RunOutcome& outcome) {
  const EigenResult& r = outcome.result;
  std::ostringstream os;
  os << "problem     " << outcome.problem_description << '\n';
  os << "solver      " << to_string(config.solver);
  if (config.solver == SolverKind::davidson) os << " (cap " << config.davidson_cap << ")";
  os << ", precond " << to_string(config.precond) << '\n';
  os << "converged   " << (r.converged ? "yes" : "no (max_iter reached)") << '\n';
  os << "iterations  " << r.stats.iterations << '\n';
  os << "matvecs     " << r.stats.matvecs << '\n';
  if (r.stats.precond_fallbacks > 0) os << "fallbacks   " << r.stats.precond_fallbacks << '\n';
  os << "eigenvalues\n";
  os << std::scientific << std::setprecision(15);
  for (Index k = 0; k < r.eigenvalues.size(); ++k) {
    os << std::setw(5) << (k + 1) << "  " << std::setw(23) << r.eigenvalues(k) << "  rms " << std::setprecision(3)
       << r.residual_rms(k) << std::setprecision(15) << '\n';
  }
  return os.str();
}

std::string compare_table(const std::vector<CompareRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"solver", "precond", "iterations", "matvecs", "converged"});
  for (const auto& r : rows) {
    cells.push_back({solver_label(r), precond_label(r), std::to_string(r.iterations), std::to_string(r.matvecs), status(r)});
  }
  std::vector<std::size_t> w(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t k = 0; k < line.size(); ++k) w[k] = std::max(w[k], line[k].size());

  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t k = 0; k < cells[i].size(); ++k) {
      if (k > 0) os << "  ";
      if (k < 2) os << std::left << std::setw(static_cast<int>(w[k])) << cells[i][k];
      else os << std::right << std::setw(static_cast<int>(w[k])) << cells[i][k];
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto x : w) total += x;
      os << std::string(total + 2 * (w.size() - 1), '-') << '\n';
    }
  }

  // Iteration grid: solvers down, preconditioners across.
  std::vector<std::string> solvers, preconds;
  std::map<std::pair<std::string, std::string>, std::string> grid;
  for (const auto& r : rows) {
    const auto s = solver_label(r), p = precond_label(r);
    if (std::find(solvers.begin(), solvers.end(), s) == solvers.end()) solvers.push_back(s);
    if (std::find(preconds.begin(), preconds.end(), p) == preconds.end()) preconds.push_back(p);
    grid.emplace(std::make_pair(s, p), r.error.empty() ? std::to_string(r.iterations) + (r.converged ? "" : "*") : "err");
  }
  if (solvers.size() > 1 && preconds.size() > 1) {
    std::size_t sw = 0;
    for (const auto& s : solvers) sw = std::max(sw, s.size());
    std::size_t pw = 0;
    for (const auto& p : preconds) pw = std::max(pw, p.size());
    os << "\niterations\n" << std::left << std::setw(static_cast<int>(sw)) << "";
    for (const auto& p : preconds) os << "  " << std::right << std::setw(static_cast<int>(pw)) << p;
    os << '\n';
    for (const auto& s : solvers) {
      os << std::left << std::setw(static_cast<int>(sw)) << s;
      for (const auto& p : preconds) {
        auto it = grid.find({s, p});
        os << "  " << std::right << std::setw(static_cast<int>(pw)) << (it == grid.end() ? "-" : it->second);
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "solver,precond,davidson_cap,iterations,matvecs,converged,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << to_string(r.solver) << ',' << to_string(r.precond) << ','
       << (r.solver == SolverKind::davidson ? std::to_string(r.davidson_cap) : "") << ',' << r.iterations << ','
       << r.matvecs << ',' << (r.converged ? 1 : 0) << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace blockeig::cli
