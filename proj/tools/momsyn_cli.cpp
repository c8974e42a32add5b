#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "momsyn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace momsyn;

namespace {

int cmd_run(const std::string& problem, const std::vector<int>& orders, const RunSettings& settings,
            const std::string& out_dir) {
  const RunReport report = run(problem, orders, settings, out_dir);
  std::printf("problem: %s\n", report.problem_name.c_str());
  if (report.oracle_value) std::printf("oracle reference: %.6f\n", *report.oracle_value);
  std::printf("%4s %4s %14s %14s %12s %10s  %s\n", "k", "2k", "p_k", "realized", "hit_time",
              "iters", "status");
  for (const auto& rec : report.orders) {
    if (rec.ok()) {
      std::printf("%4d %4d %14.6f %14.6f %12.4f %10d  %s\n", rec.k, 2 * rec.k, rec.lower_bound,
                  rec.realized_cost, rec.target_hit_time, rec.iterations, rec.status.c_str());
    } else {
      std::printf("%4d %4d  error: %s\n", rec.k, 2 * rec.k, rec.error.c_str());
    }
  }
  for (const auto& flag : report.flags) std::printf("flag: %s\n", flag.c_str());
  std::printf("outputs written to %s\n", out_dir.c_str());
  if (settings.strict) {
    for (const auto& rec : report.orders) {
      if (!rec.ok()) return 2;
    }
    if (!report.flags.empty()) return 3;
  }
  return 0;
}

int cmd_oracle(const std::string& name, const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (name == "di_mintime") {
    const OCProblem problem = builtin_problem("di_mintime");
    const MinTimeOracle oracle = oracle_di_mintime(problem.x0.head<2>());
    std::printf("di_mintime oracle\n");
    std::printf("  optimal time t* = %.6f\n", oracle.optimal_time);
    std::printf("  switch time     = %.6f (u: %+g then %+g)\n", oracle.switch_time,
                oracle.initial_control, -oracle.initial_control);
    SimulateOptions opts;
    opts.step = 1e-4;
    opts.target_tolerance = 1e-4;
    const SimulationResult sim = simulate(problem, di_bang_bang_feedback, opts);
    write_trajectory_csv(sim, (fs::path(out_dir) / "oracle_trajectory.csv").string());
    write_control_csv(sim, (fs::path(out_dir) / "oracle_control.csv").string());
    std::printf("  simulated hit time = %.6f\n", sim.target_hit_time);
    std::printf("  trajectory: %s\n", (fs::path(out_dir) / "oracle_trajectory.csv").c_str());
    return 0;
  }
  if (name == "di_lqr") {
    const LqrOracle oracle = oracle_di_lqr();
    std::printf("di_lqr oracle (Riccati, Q=I, R=20, T=5)\n");
    std::printf("  J* = %.8f\n", oracle.optimal_cost);
    std::printf("  K(0) = [%.6f, %.6f]\n", oracle.gains(0, 0), oracle.gains(0, 1));
    {
      std::ofstream os(fs::path(out_dir) / "oracle_gains.csv");
      os << "t,k1,k2\n" << std::setprecision(12);
      for (int i = 0; i < oracle.gain_times.size(); ++i) {
        os << oracle.gain_times[i] << "," << oracle.gains(i, 0) << "," << oracle.gains(i, 1)
           << "\n";
      }
    }
    const OCProblem problem = builtin_problem("di_lqr");
    const LqrOracle& o = oracle;
    ControlLaw law = [&o](double t, const Eigen::VectorXd& x) {
      // Piecewise-constant interpolation of the gain schedule.
      int lo = 0, hi = static_cast<int>(o.gain_times.size()) - 1;
      while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (o.gain_times[mid] <= t) lo = mid;
        else hi = mid - 1;
      }
      Eigen::VectorXd u(1);
      u[0] = -o.gains.row(lo).dot(x);
      return u;
    };
    SimulateOptions opts;
    opts.step = 1e-4;
    const SimulationResult sim = simulate(problem, law, opts);
    write_trajectory_csv(sim, (fs::path(out_dir) / "oracle_trajectory.csv").string());
    write_control_csv(sim, (fs::path(out_dir) / "oracle_control.csv").string());
    std::printf("  simulated LQR cost = %.8f\n", sim.realized_cost);
    std::printf("  trajectory: %s\n", (fs::path(out_dir) / "oracle_trajectory.csv").c_str());
    return 0;
  }
  std::fprintf(stderr, "oracle: unknown name '%s' (expected di_mintime or di_lqr)\n",
               name.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"momsyn: occupation-measure moment relaxations for polynomial optimal control"};
  app.require_subcommand(1);

  std::string problem, out_dir = default_out_dir(), format_str = "sdpa", path, solution_path,
              oracle_name;
  std::vector<int> orders;
  int k = 0;
  RunSettings settings;

  auto add_solver_opts = [&](CLI::App* cmd) {
    cmd->add_option("--max-iter", settings.solver.max_iterations, "Interior-point iteration cap");
    cmd->add_option("--feas-tol", settings.solver.feas_tol, "Feasibility tolerance");
    cmd->add_option("--gap-tol", settings.solver.gap_tol, "Duality gap tolerance");
    cmd->add_flag("--no-presolve", [&](int64_t) { settings.solver.presolve = false; },
                  "Disable equality-substitution presolve");
    cmd->add_flag("--verbose", settings.solver.verbose, "Per-iteration solver output");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Sweep relaxation orders and synthesize");
  run_cmd->add_option("--problem", problem, "Builtin name or problem JSON file")->required();
  run_cmd->add_option("--orders", orders, "Relaxation orders k (ascending)")
      ->required()
      ->delimiter(',');
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--jobs", settings.jobs, "Solve orders in parallel");
  run_cmd->add_option("--step", settings.simulate.step, "Simulation step size");
  run_cmd->add_option("--target-tol", settings.simulate.target_tolerance,
                      "Free-mode target slack (scaled)");
  run_cmd->add_flag("--strict", settings.strict, "Exit nonzero on any flagged anomaly");
  add_solver_opts(run_cmd);

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Print analytic reference values");
  oracle_cmd->add_option("name", oracle_name, "di_mintime or di_lqr")->required();
  oracle_cmd->add_option("--out", out_dir, "Output directory for oracle CSVs");

  CLI::App* export_cmd = app.add_subcommand("export", "Write the assembled SDP to a file");
  export_cmd->add_option("--problem", problem, "Builtin name or problem JSON file")->required();
  export_cmd->add_option("--k", k, "Relaxation order")->required();
  export_cmd->add_option("--format", format_str, "sdpa | json");
  export_cmd->add_option("--out", path, "Output file")->required();

  CLI::App* import_cmd = app.add_subcommand("import", "Verify an externally solved result");
  import_cmd->add_option("--problem", problem, "Builtin name or problem JSON file")->required();
  import_cmd->add_option("--k", k, "Relaxation order")->required();
  import_cmd->add_option("--solution", solution_path, "Result JSON {status, objective, y}")
      ->required();

  CLI::App* dump_cmd = app.add_subcommand("dump", "Write a builtin problem as JSON");
  dump_cmd->add_option("--problem", problem, "Builtin name")->required();
  dump_cmd->add_option("--out", path, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(problem, orders, settings, out_dir);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_name, out_dir);
    if (export_cmd->parsed()) {
      const OCProblem p = load_problem(problem);
      RelaxationConfig config;
      config.k = k;
      const ConicProblem cp = assemble(normalize_inputs(p), config);
      export_problem(cp, export_format_from_string(format_str), path);
      std::printf("wrote %s (%d variables, %d rows, %zu blocks)\n", path.c_str(), cp.num_vars,
                  cp.num_rows(), cp.blocks.size());
      return 0;
    }
    if (import_cmd->parsed()) {
      const OCProblem p = load_problem(problem);
      RelaxationConfig config;
      config.k = k;
      const ConicProblem cp = assemble(normalize_inputs(p), config);
      const ConicSolution sol = import_solution(solution_path, cp);
      std::printf("accepted: objective %.8f, eq residual %.3e, cone %.3e, status %s\n",
                  sol.objective, sol.residuals.primal_eq, sol.residuals.cone,
                  to_string(sol.status).c_str());
      return 0;
    }
    if (dump_cmd->parsed()) {
      const OCProblem p = load_problem(problem);
      std::ofstream os(path);
      if (!os) throw std::runtime_error("cannot open for writing: " + path);
      os << problem_to_json(p).dump(2) << "\n";
      std::printf("wrote %s\n", path.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
