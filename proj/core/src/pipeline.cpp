#include "momsyn/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <algorithm>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace momsyn {

namespace fs = std::filesystem;

std::string default_out_dir() {
  if (const char* env = std::getenv("MOMSYN_OUT")) return env;
  return "momsyn-out";
}

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct OrderOutput {
  OrderRecord record;
  std::optional<SimulationResult> sim;
  std::optional<PolynomialController> controller;
};

OrderOutput run_order(const OCProblem& problem, int k, const RunSettings& settings) {
  OrderOutput out;
  out.record.k = k;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const NormalizedProblem normalized = normalize_inputs(problem);
    RelaxationConfig config;
    config.k = k;
    const Relaxation rel = build_relaxation(normalized, config);

    const ConicSolution sol = solve(rel.conic, settings.solver);
    out.record.lower_bound = sol.objective;
    out.record.status = to_string(sol.status);
    out.record.residuals = sol.residuals;
    out.record.iterations = sol.iterations;
    if (sol.status != SolveStatus::kOptimal && sol.status != SolveStatus::kNearOptimal) {
      throw std::runtime_error("solver returned " + to_string(sol.status) + ": " + sol.message);
    }

    // Spectral cutoff follows the solver's moment accuracy: directions of
    // M_k(y_gamma) below the attained gap carry noise, not control signal.
    const double extraction_threshold =
        std::clamp(10.0 * sol.residuals.gap, 1e-8, 5e-4);
    const PolynomialController controller =
        extract_controller(sol, rel.layout, rel.scaled.scaling, extraction_threshold);
    out.record.extraction_residual = controller.diagnostics().residuals.size()
                                         ? controller.diagnostics().residuals.maxCoeff()
                                         : 0.0;
    out.record.extraction_rank = controller.diagnostics().rank;

    const SimulationResult sim = simulate(problem, controller, settings.simulate);
    out.record.realized_cost = sim.realized_cost;
    out.record.target_hit_time = sim.target_hit_time;
    out.sim = sim;
    out.controller = controller;
  } catch (const std::exception& e) {
    out.record.error = e.what();
  }
  out.record.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

std::vector<std::string> derive_flags(const std::vector<OrderRecord>& orders) {
  // Bounds must be nondecreasing in k and must stay below the realized cost
  // of the corresponding controller.
  std::vector<std::string> flags;
  const OrderRecord* prev = nullptr;
  for (const auto& rec : orders) {
    if (!rec.ok()) continue;
    if (prev && rec.lower_bound + 1e-6 < prev->lower_bound) {
      std::ostringstream os;
      os << "monotonicity: p_" << rec.k << "=" << rec.lower_bound << " < p_" << prev->k << "="
         << prev->lower_bound;
      flags.push_back(os.str());
    }
    if (rec.realized_cost < rec.lower_bound - 1e-3) {
      std::ostringstream os;
      os << "bound violation at k=" << rec.k << ": realized " << rec.realized_cost << " < p_k "
         << rec.lower_bound << " - 1e-3";
      flags.push_back(os.str());
    }
    prev = &rec;
  }
  return flags;
}

RunReport run(const std::string& problem_source, const std::vector<int>& orders,
              const RunSettings& settings, const std::string& out_dir) {
  if (orders.empty()) throw std::invalid_argument("run: need at least one relaxation order");
  if (!std::is_sorted(orders.begin(), orders.end())) {
    throw std::invalid_argument("run: orders must be ascending");
  }
  const OCProblem problem = load_problem(problem_source);
  {
    const auto diags = validate(problem);
    if (!diags.empty()) {
      std::string msg = "invalid problem:";
      for (const auto& d : diags) msg += " [" + d.code + "] " + d.message;
      throw std::invalid_argument(msg);
    }
  }

  RunReport report;
  report.problem_name = problem_source;
  report.problem_echo = problem_to_json(problem);
  report.timestamp = iso_timestamp();
  {
    const NormalizedProblem normalized = normalize_inputs(problem);
    report.scaling = scale_problem(normalized).scaling;
  }
  if (problem_source == "di_mintime") {
    report.oracle_value = oracle_di_mintime(problem.x0.head<2>()).optimal_time;
  } else if (problem_source == "di_lqr") {
    report.oracle_value = oracle_di_lqr().optimal_cost;
  }

  std::vector<OrderOutput> outputs(orders.size());
  const int jobs = std::max(1, settings.jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < orders.size(); ++i) outputs[i] = run_order(problem, orders[i], settings);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < orders.size(); i = next.fetch_add(1)) {
          outputs[i] = run_order(problem, orders[i], settings);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& o : outputs) report.orders.push_back(o.record);

  report.flags = derive_flags(report.orders);

  if (settings.write_files) {
    fs::create_directories(out_dir);
    {
      std::ofstream os(fs::path(out_dir) / "report.json");
      os << report_to_json(report).dump(2) << "\n";
    }
    {
      std::ofstream os(fs::path(out_dir) / "convergence.csv");
      os << "k,2k,p_k,status,realized_cost,target_hit_time,extraction_residual,iterations,"
            "solve_seconds\n";
      os << std::setprecision(12);
      for (const auto& rec : report.orders) {
        os << rec.k << "," << 2 * rec.k << "," << rec.lower_bound << "," << rec.status << ","
           << rec.realized_cost << "," << rec.target_hit_time << "," << rec.extraction_residual
           << "," << rec.iterations << "," << rec.solve_seconds << "\n";
      }
    }
    for (size_t i = 0; i < outputs.size(); ++i) {
      if (!outputs[i].sim) continue;
      const fs::path dir = fs::path(out_dir) / ("k" + std::to_string(orders[i]));
      fs::create_directories(dir);
      write_trajectory_csv(*outputs[i].sim, (dir / "trajectory.csv").string());
      write_control_csv(*outputs[i].sim, (dir / "control.csv").string());
      if (outputs[i].controller) {
        std::ofstream os(dir / "controller.json");
        os << controller_to_json(*outputs[i].controller).dump(2) << "\n";
      }
    }
  }
  return report;
}

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["problem"] = report.problem_name;
  j["problem_data"] = report.problem_echo;
  j["timestamp"] = report.timestamp;
  j["flags"] = report.flags;
  if (report.oracle_value) j["oracle_value"] = *report.oracle_value;
  j["scaling"] = {
      {"horizon", report.scaling.horizon},
      {"x_center",
       std::vector<double>(report.scaling.x_center.begin(), report.scaling.x_center.end())},
      {"x_halfwidth",
       std::vector<double>(report.scaling.x_halfwidth.begin(), report.scaling.x_halfwidth.end())},
      {"input_offset", std::vector<double>(report.scaling.input_map.offset.begin(),
                                           report.scaling.input_map.offset.end())},
      {"input_scale", std::vector<double>(report.scaling.input_map.scale.begin(),
                                          report.scaling.input_map.scale.end())},
  };
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& rec : report.orders) {
    nlohmann::json jo;
    jo["k"] = rec.k;
    jo["two_k"] = 2 * rec.k;
    jo["p_k"] = rec.lower_bound;
    jo["status"] = rec.status;
    jo["residuals"] = {{"primal_eq", rec.residuals.primal_eq},
                       {"cone", rec.residuals.cone},
                       {"dual", rec.residuals.dual},
                       {"gap", rec.residuals.gap},
                       {"complementarity", rec.residuals.complementarity}};
    jo["extraction_residual"] = rec.extraction_residual;
    jo["extraction_rank"] = rec.extraction_rank;
    jo["realized_cost"] = rec.realized_cost;
    jo["target_hit_time"] = rec.target_hit_time;
    jo["iterations"] = rec.iterations;
    if (!rec.error.empty()) jo["error"] = rec.error;
    orders.push_back(jo);
  }
  j["orders"] = orders;
  return j;
}

void write_trajectory_csv(const SimulationResult& sim, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "t";
  for (int i = 0; i < sim.states.cols(); ++i) os << ",x" << (i + 1);
  for (int j = 0; j < sim.controls.cols(); ++j) os << ",u" << (j + 1);
  os << "\n" << std::setprecision(12);
  for (int r = 0; r < sim.times.size(); ++r) {
    os << sim.times[r];
    for (int i = 0; i < sim.states.cols(); ++i) os << "," << sim.states(r, i);
    for (int j = 0; j < sim.controls.cols(); ++j) os << "," << sim.controls(r, j);
    os << "\n";
  }
}

void write_control_csv(const SimulationResult& sim, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "t";
  for (int j = 0; j < sim.controls.cols(); ++j) os << ",u" << (j + 1);
  os << "\n" << std::setprecision(12);
  for (int r = 0; r < sim.times.size(); ++r) {
    os << sim.times[r];
    for (int j = 0; j < sim.controls.cols(); ++j) os << "," << sim.controls(r, j);
    os << "\n";
  }
}

}  // namespace momsyn
