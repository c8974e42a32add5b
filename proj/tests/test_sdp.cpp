#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "momsyn/sdp.hpp"
#include "testing_oracles.hpp"

using namespace momsyn;

namespace fs = std::filesystem;

namespace {

/// min x s.t. [[x, 1], [1, x]] >= 0; optimum x = 1.
ConicProblem toy_arrow() {
  ConicProblem cp;
  cp.num_vars = 1;
  cp.objective = Eigen::VectorXd::Ones(1);
  cp.b = Eigen::VectorXd();
  PSDBlock block;
  block.name = "arrow";
  block.side = 2;
  block.entries.resize(3);
  block.at(0, 0).terms = {{0, 1.0}};
  block.at(0, 1).constant = 1.0;
  block.at(1, 1).terms = {{0, 1.0}};
  cp.blocks.push_back(block);
  return cp;
}

/// min x s.t. [x - 2] >= 0; optimum x = 2.
ConicProblem toy_shift() {
  ConicProblem cp;
  cp.num_vars = 1;
  cp.objective = Eigen::VectorXd::Ones(1);
  cp.b = Eigen::VectorXd();
  PSDBlock block;
  block.name = "shift";
  block.side = 1;
  block.entries.resize(1);
  block.at(0, 0).constant = -2.0;
  block.at(0, 0).terms = {{0, 1.0}};
  cp.blocks.push_back(block);
  return cp;
}

/// min y2 s.t. y0 = 1, y1 = 1/2, [[y0, y1], [y1, y2]] >= 0; optimum y2 = 1/4.
ConicProblem toy_hankel() {
  ConicProblem cp;
  cp.num_vars = 3;
  cp.objective = Eigen::Vector3d(0.0, 0.0, 1.0);
  cp.rows = {{{0, 1.0}}, {{1, 1.0}}};
  cp.b = Eigen::Vector2d(1.0, 0.5);
  PSDBlock block;
  block.name = "hankel";
  block.side = 2;
  block.entries.resize(3);
  block.at(0, 0).terms = {{0, 1.0}};
  block.at(0, 1).terms = {{1, 1.0}};
  block.at(1, 1).terms = {{2, 1.0}};
  cp.blocks.push_back(block);
  return cp;
}

}  // namespace

TEST_CASE("toy SDP answers to 1e-6") {
  for (bool presolve : {true, false}) {
    SolverSettings s;
    s.presolve = presolve;

    const ConicSolution arrow = solve(toy_arrow(), s);
    CHECK(arrow.status == SolveStatus::kOptimal);
    CHECK(arrow.objective == doctest::Approx(1.0).epsilon(1e-6));

    const ConicSolution shift = solve(toy_shift(), s);
    CHECK(shift.status == SolveStatus::kOptimal);
    CHECK(shift.objective == doctest::Approx(2.0).epsilon(1e-6));

    const ConicSolution hankel = solve(toy_hankel(), s);
    CHECK(hankel.status == SolveStatus::kOptimal);
    CHECK(hankel.objective == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(hankel.y[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(hankel.y[1] == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("weak duality along the iterate trace") {
  const ConicSolution sol = solve(toy_hankel());
  REQUIRE(!sol.trace.empty());
  for (const auto& it : sol.trace) {
    // Once the residuals are meaningful, the primal objective sits above the
    // dual objective up to the gap tolerance scale.
    if (it.primal_res < 1e-6 && it.dual_res < 1e-6) {
      CHECK(it.primal_obj >= it.dual_obj - 1e-6 * (1.0 + std::abs(it.primal_obj)));
    }
  }
}

TEST_CASE("optimal solutions satisfy complementarity per block") {
  for (auto factory : {toy_arrow, toy_shift, toy_hankel}) {
    const ConicProblem cp = factory();
    const ConicSolution sol = solve(cp);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    REQUIRE(sol.block_duals.size() == cp.blocks.size());
    for (size_t i = 0; i < cp.blocks.size(); ++i) {
      const Eigen::MatrixXd S = cp.blocks[i].evaluate(sol.y);
      const double comp = (S.array() * sol.block_duals[i].array()).sum();
      CHECK(std::abs(comp) <= 10.0 * 1e-7 * (1.0 + std::abs(sol.objective)));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -10.0 * 1e-7);
    }
  }
}

TEST_CASE("infeasible problems are certified") {
  // y = 1 forced by a row while the 1x1 block demands -y >= 0.
  ConicProblem primal_inf;
  primal_inf.num_vars = 1;
  primal_inf.objective = Eigen::VectorXd::Zero(1);
  primal_inf.rows = {{{0, 1.0}}};
  primal_inf.b = Eigen::VectorXd::Ones(1);
  PSDBlock neg;
  neg.name = "neg";
  neg.side = 1;
  neg.entries.resize(1);
  neg.at(0, 0).terms = {{0, -1.0}};
  primal_inf.blocks.push_back(neg);
  SolverSettings s;
  s.presolve = false;
  const ConicSolution sol = solve(primal_inf, s);
  CHECK(sol.status == SolveStatus::kPrimalInfeasible);

  // min -y with [y] >= 0: unbounded below (dual infeasible).
  ConicProblem unbounded;
  unbounded.num_vars = 1;
  unbounded.objective = -Eigen::VectorXd::Ones(1);
  unbounded.b = Eigen::VectorXd();
  PSDBlock pos;
  pos.name = "pos";
  pos.side = 1;
  pos.entries.resize(1);
  pos.at(0, 0).terms = {{0, 1.0}};
  unbounded.blocks.push_back(pos);
  const ConicSolution usol = solve(unbounded, s);
  CHECK(usol.status == SolveStatus::kDualInfeasible);
}

TEST_CASE("presolve agrees with the plain solve on a structured problem") {
  const Relaxation rel = testing::oracle_relaxation(2);
  SolverSettings on, off;
  on.feas_tol = on.gap_tol = off.feas_tol = off.gap_tol = 1e-6;
  off.presolve = false;
  const ConicSolution a = solve(rel.conic, on);
  const ConicSolution b = solve(rel.conic, off);
  REQUIRE(a.status != SolveStatus::kPrimalInfeasible);
  REQUIRE(b.status != SolveStatus::kPrimalInfeasible);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(5e-4));
  // Either path must verify against the original problem.
  CHECK(a.residuals.primal_eq <= 1e-4);
  CHECK(b.residuals.primal_eq <= 1e-4);
  CHECK(a.residuals.dual <= 1e-4);
}

TEST_CASE("reconstructed duals satisfy dual feasibility after presolve") {
  const Relaxation rel = testing::oracle_relaxation(2);
  SolverSettings s;
  s.feas_tol = s.gap_tol = 1e-6;
  const ConicSolution sol = solve(rel.conic, s);
  // measure_residuals recomputes everything against the original rows and
  // blocks, so a small dual residual certifies the back-substituted lambda.
  const ResidualReport rep =
      measure_residuals(rel.conic, sol.y, sol.row_duals, sol.block_duals);
  CHECK(rep.dual <= 1e-4);
  CHECK(rep.primal_eq <= 1e-6);
}

TEST_CASE("solver is deterministic") {
  const Relaxation rel = testing::oracle_relaxation(2);
  const ConicSolution a = solve(rel.conic);
  const ConicSolution b = solve(rel.conic);
  CHECK(a.iterations == b.iterations);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.objective == b.objective);
}

TEST_CASE("sdpa sparse export structure") {
  const fs::path path = fs::temp_directory_path() / "momsyn_toy.dat-s";
  export_problem(toy_arrow(), ExportFormat::kSdpaSparse, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // comment
  CHECK(line[0] == '*');
  std::getline(in, line);
  CHECK(line.substr(0, 1) == "1");  // mDIM
  std::getline(in, line);
  CHECK(line.substr(0, 1) == "1");  // nBLOCK: a single 2x2 block
  std::getline(in, line);
  CHECK(line == "2");  // block structure
  std::getline(in, line);
  CHECK(line == "1");  // objective
  // Entries: F0 carries -constant, F1 the identity pattern.
  int f0 = 0, f1 = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '0') ++f0;
    else ++f1;
  }
  CHECK(f0 == 1);
  CHECK(f1 == 2);
  fs::remove(path);
}

TEST_CASE("sdpa export encodes equalities as paired diagonal entries") {
  const fs::path path = fs::temp_directory_path() / "momsyn_hankel.dat-s";
  export_problem(toy_hankel(), ExportFormat::kSdpaSparse, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.substr(0, 1) == "3");  // mDIM
  std::getline(in, line);
  CHECK(line.substr(0, 1) == "2");  // nBLOCK: PSD block + diagonal block
  std::getline(in, line);
  CHECK(line == "2 -4");  // negative size marks the diagonal block
  fs::remove(path);
}

TEST_CASE("interchange JSON round trips through files") {
  const fs::path path = fs::temp_directory_path() / "momsyn_problem.json";
  const ConicProblem cp = toy_hankel();
  export_problem(cp, ExportFormat::kInterchangeJson, path.string());
  const ConicProblem back = import_problem_json(path.string());
  CHECK(back.num_vars == cp.num_vars);
  CHECK(back.num_rows() == cp.num_rows());
  CHECK(back.blocks.size() == cp.blocks.size());
  CHECK(back.blocks[0].side == 2);
  fs::remove(path);
}

TEST_CASE("solution export, import and verification") {
  const ConicProblem cp = toy_hankel();
  const ConicSolution sol = solve(cp);
  const fs::path path = fs::temp_directory_path() / "momsyn_solution.json";
  write_solution_json(sol, path.string());

  const ConicSolution imported = import_solution(path.string(), cp);
  CHECK(imported.objective == doctest::Approx(sol.objective));
  CHECK(imported.residuals.primal_eq <= 10.0 * std::max(sol.residuals.primal_eq, 1e-12));
  CHECK(imported.residuals.cone <= 1e-5);

  // Breaking an equality gets the candidate rejected.
  {
    nlohmann::json j;
    std::ifstream in(path);
    in >> j;
    j["y"][0] = 2.0;
    j["objective"] = cp.objective[0] * 2.0 + j["y"][2].get<double>();
    std::ofstream os(path);
    os << j.dump();
  }
  CHECK_THROWS_AS(import_solution(path.string(), cp), ImportError);

  // Truncated file: schema error.
  {
    std::ofstream os(path);
    os << "{\"status\": \"optimal\"";
  }
  CHECK_THROWS_AS(import_solution(path.string(), cp), ImportError);
  fs::remove(path);
}

TEST_CASE("status names") {
  CHECK(to_string(SolveStatus::kOptimal) == "optimal");
  CHECK(to_string(SolveStatus::kNearOptimal) == "near_optimal");
  CHECK(to_string(SolveStatus::kPrimalInfeasible) == "primal_infeasible");
  CHECK(to_string(SolveStatus::kDualInfeasible) == "dual_infeasible");
  CHECK(to_string(SolveStatus::kIterationLimit) == "iteration_limit");
}
