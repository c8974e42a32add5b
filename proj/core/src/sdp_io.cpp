#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "momsyn/sdp.hpp"

namespace momsyn {

ExportFormat export_format_from_string(const std::string& s) {
  if (s == "json" || s == "interchange_json") return ExportFormat::kInterchangeJson;
  if (s == "sdpa" || s == "sdpa_sparse") return ExportFormat::kSdpaSparse;
  throw std::invalid_argument("unknown export format: " + s);
}

namespace {

void write_sdpa_sparse(const ConicProblem& cp, std::ostream& os) {
  // SDPA pair: min c'x with X = sum_i x_i F_i - F_0 >= 0. Our moment vector
  // maps onto the free x variables; each equality row a'y = b becomes the
  // pair a'y - b >= 0, b - a'y >= 0 in a trailing diagonal block.
  const int m_eq = cp.num_rows();
  const int nblock = static_cast<int>(cp.blocks.size()) + (m_eq > 0 ? 1 : 0);

  os << "* momsyn conic problem (k=" << cp.meta.k << ")\n";
  os << cp.num_vars << " = mDIM\n";
  os << nblock << " = nBLOCK\n";
  for (size_t i = 0; i < cp.blocks.size(); ++i) {
    os << (i ? " " : "") << cp.blocks[i].side;
  }
  if (m_eq > 0) os << (cp.blocks.empty() ? "" : " ") << -(2 * m_eq);
  os << "\n";
  os << std::setprecision(17);
  for (int v = 0; v < cp.num_vars; ++v) os << (v ? " " : "") << cp.objective[v];
  os << "\n";

  auto entry = [&os](int matno, int blockno, int i, int j, double value) {
    if (value == 0.0) return;
    os << matno << " " << blockno << " " << i << " " << j << " " << value << "\n";
  };

  for (size_t bidx = 0; bidx < cp.blocks.size(); ++bidx) {
    const PSDBlock& block = cp.blocks[bidx];
    const int blockno = static_cast<int>(bidx) + 1;
    for (int r = 0; r < block.side; ++r) {
      for (int c = r; c < block.side; ++c) {
        const BlockEntry& e = block.at(r, c);
        entry(0, blockno, r + 1, c + 1, -e.constant);
        for (const auto& [var, coef] : e.terms) entry(var + 1, blockno, r + 1, c + 1, coef);
      }
    }
  }
  if (m_eq > 0) {
    const int blockno = nblock;
    for (int r = 0; r < m_eq; ++r) {
      entry(0, blockno, r + 1, r + 1, cp.b[r]);
      entry(0, blockno, m_eq + r + 1, m_eq + r + 1, -cp.b[r]);
      for (const auto& [var, coef] : cp.rows[static_cast<size_t>(r)]) {
        entry(var + 1, blockno, r + 1, r + 1, coef);
        entry(var + 1, blockno, m_eq + r + 1, m_eq + r + 1, -coef);
      }
    }
  }
}

}  // namespace

void export_problem(const ConicProblem& cp, ExportFormat format, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  if (format == ExportFormat::kSdpaSparse) {
    write_sdpa_sparse(cp, os);
  } else {
    os << conic_to_json(cp).dump(2) << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

ConicProblem import_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  nlohmann::json j;
  in >> j;
  return conic_from_json(j);
}

void write_solution_json(const ConicSolution& sol, const std::string& path) {
  nlohmann::json j;
  j["status"] = to_string(sol.status);
  j["objective"] = sol.objective;
  j["y"] = std::vector<double>(sol.y.begin(), sol.y.end());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

ConicSolution import_solution(const std::string& path, const ConicProblem& problem,
                              const SolverSettings& settings) {
  std::ifstream in(path);
  if (!in) throw ImportError("cannot open solution file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ImportError(std::string("solution file is not valid JSON: ") + e.what());
  }
  if (!j.contains("status") || !j.contains("objective") || !j.contains("y")) {
    throw ImportError("solution schema requires fields {status, objective, y}");
  }

  ConicSolution sol;
  const std::string status = j.at("status").get<std::string>();
  if (status == "optimal") sol.status = SolveStatus::kOptimal;
  else if (status == "near_optimal") sol.status = SolveStatus::kNearOptimal;
  else if (status == "primal_infeasible") sol.status = SolveStatus::kPrimalInfeasible;
  else if (status == "dual_infeasible") sol.status = SolveStatus::kDualInfeasible;
  else if (status == "iteration_limit") sol.status = SolveStatus::kIterationLimit;
  else throw ImportError("unknown status value: " + status);

  const auto y = j.at("y").get<std::vector<double>>();
  if (static_cast<int>(y.size()) != problem.num_vars) {
    throw ImportError("solution has " + std::to_string(y.size()) + " variables, expected " +
                      std::to_string(problem.num_vars));
  }
  sol.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<long>(y.size()));
  sol.objective = problem.objective.dot(sol.y);
  const double claimed = j.at("objective").get<double>();
  if (std::abs(claimed - sol.objective) > 1e-6 * (1.0 + std::abs(sol.objective))) {
    throw ImportError("claimed objective disagrees with c'y");
  }

  sol.residuals = measure_residuals(problem, sol.y, Eigen::VectorXd(), {});
  const double limit = 100.0 * settings.feas_tol;
  if (sol.residuals.primal_eq > limit || sol.residuals.cone > limit) {
    std::ostringstream msg;
    msg << "solution rejected: residuals exceed 100x tolerance (eq "
        << sol.residuals.primal_eq << ", cone " << sol.residuals.cone << ", limit " << limit
        << ")";
    throw ImportError(msg.str());
  }
  sol.message = "imported from " + path;
  return sol;
}

}  // namespace momsyn
