#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "momsyn/ocp.hpp"
#include "momsyn/sdp.hpp"
#include "momsyn/synthesis.hpp"

namespace momsyn {

struct RunSettings {
  SolverSettings solver;
  SimulateOptions simulate;
  int jobs = 1;
  bool strict = false;
  bool write_files = true;
};

struct OrderRecord {
  int k = 0;
  double lower_bound = 0.0;   // p_k^*
  std::string status;
  ResidualReport residuals;
  double extraction_residual = 0.0;
  int extraction_rank = 0;
  double realized_cost = 0.0;
  double target_hit_time = -1.0;
  double solve_seconds = 0.0;
  int iterations = 0;
  std::string error;  // non-empty when a stage failed

  bool ok() const { return error.empty(); }
};

struct RunReport {
  std::string problem_name;
  nlohmann::json problem_echo;
  std::vector<OrderRecord> orders;
  std::vector<std::string> flags;  // monotonicity / bound anomalies
  std::optional<double> oracle_value;  // t* or J* when a reference exists
  ScalingInfo scaling;
  std::string timestamp;
};

/// Anomaly flags: a lower bound decreasing with the order, or a realized
/// cost undercutting its own lower bound.
std::vector<std::string> derive_flags(const std::vector<OrderRecord>& orders);

/// Full pipeline: assemble -> solve -> extract -> simulate per order, plus
/// report.json, convergence.csv and per-order trajectory/control CSVs under
/// `out_dir` (one k<order> subdirectory per order).
RunReport run(const std::string& problem_source, const std::vector<int>& orders,
              const RunSettings& settings, const std::string& out_dir);

nlohmann::json report_to_json(const RunReport& report);

void write_trajectory_csv(const SimulationResult& sim, const std::string& path);
void write_control_csv(const SimulationResult& sim, const std::string& path);

/// Default output directory: $MOMSYN_OUT when set, else "./momsyn-out".
std::string default_out_dir();

}  // namespace momsyn
