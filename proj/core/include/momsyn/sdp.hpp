#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "momsyn/relaxation.hpp"

namespace momsyn {

struct SolverSettings {
  int max_iterations = 200;
  double feas_tol = 1e-7;
  double gap_tol = 1e-7;
  double step_fraction = 0.98;         // fraction-to-boundary for both cones
  double infeas_threshold = 1e-10;     // certificate trigger scale
  bool presolve = true;                // substitute small equality rows away
  double initial_radius = 1.0;         // S = Z = radius * I at start
  bool verbose = false;
};

enum class SolveStatus {
  kOptimal,
  kNearOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kIterationLimit,
};

std::string to_string(SolveStatus status);

struct ResidualReport {
  double primal_eq = 0.0;      // ||A y - b||_inf / (1 + ||b||_inf)
  double cone = 0.0;           // max block violation: max(0, -lambda_min(B(y)))
  double dual = 0.0;           // ||c - A'lam - B*(Z)||_inf / (1 + ||c||_inf)
  double gap = 0.0;            // relative primal-dual objective gap
  double complementarity = 0.0;  // max_i <B_i(y), Z_i>

  double worst() const;
};

struct IterateInfo {
  int iter = 0;
  double mu = 0.0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct ConicSolution {
  Eigen::VectorXd y;
  double objective = 0.0;
  double dual_objective = 0.0;
  Eigen::VectorXd row_duals;
  std::vector<Eigen::MatrixXd> block_duals;
  SolveStatus status = SolveStatus::kIterationLimit;
  ResidualReport residuals;
  int iterations = 0;
  std::vector<IterateInfo> trace;
  std::string message;
};

/// Dense primal-dual interior-point method (predictor-corrector, HKM
/// scaling). Numerical trouble is reported through `status`, never thrown.
ConicSolution solve(const ConicProblem& problem, const SolverSettings& settings = {});

/// Measures residuals of an arbitrary candidate point against a problem.
ResidualReport measure_residuals(const ConicProblem& problem, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& row_duals,
                                 const std::vector<Eigen::MatrixXd>& block_duals);

enum class ExportFormat { kInterchangeJson, kSdpaSparse };

ExportFormat export_format_from_string(const std::string& s);

/// Writes the problem for external solvers. The SDPA sparse form encodes the
/// equality rows as paired inequalities in a trailing diagonal block; the
/// moment variables map directly onto the format's free scalar variables.
void export_problem(const ConicProblem& problem, ExportFormat format, const std::string& path);

ConicProblem import_problem_json(const std::string& path);

/// Thrown when an imported solution fails schema checks or residual
/// verification against the original problem.
struct ImportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads an externally produced result {status, objective, y} and re-verifies
/// it against `problem`; rejects candidates whose residuals exceed 100x the
/// solver tolerances.
ConicSolution import_solution(const std::string& path, const ConicProblem& problem,
                              const SolverSettings& settings = {});

void write_solution_json(const ConicSolution& solution, const std::string& path);

}  // namespace momsyn
