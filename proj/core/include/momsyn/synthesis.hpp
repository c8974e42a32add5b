#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "momsyn/relaxation.hpp"
#include "momsyn/sdp.hpp"

namespace momsyn {

struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExtractionDiagnostics {
  Eigen::VectorXd gamma_spectrum;   // eigenvalues of M_k(y_gamma)
  int rank = 0;                     // retained spectral rank
  Eigen::VectorXd residuals;        // ||M vec(u_j) - rhs_j|| per input
  double mass = 0.0;                // gamma mass
};

/// Feedback law u(t, x): polynomials in the scaled (t,x) frame, clamped to
/// [-1,1]^m and mapped through the affine input map on evaluation.
class PolynomialController {
 public:
  PolynomialController() = default;
  PolynomialController(std::vector<Polynomial> coeffs_scaled, ScalingInfo scaling,
                       ExtractionDiagnostics diagnostics);

  int num_inputs() const { return static_cast<int>(polys_.size()); }
  const std::vector<Polynomial>& polynomials() const { return polys_; }
  const ScalingInfo& scaling() const { return scaling_; }
  const ExtractionDiagnostics& diagnostics() const { return diagnostics_; }

  /// Raw polynomial values in the scaled frame, before clamping.
  Eigen::VectorXd evaluate_scaled(double tau, const Eigen::VectorXd& x_scaled) const;
  /// Saturated input in original coordinates at physical (t, x).
  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const;

 private:
  std::vector<Polynomial> polys_;  // over (tau, x_scaled), degree <= k
  ScalingInfo scaling_;
  ExtractionDiagnostics diagnostics_;
};

/// Solves M_k(y_gamma) vec(u_j) = y_sigma+_j - y_sigma-_j for each input via
/// a spectral generalized inverse (eigenvalues below tau_rank * lambda_max
/// are treated as zero).
PolynomialController extract_controller(const ConicSolution& solution,
                                        const VariableLayout& layout,
                                        const ScalingInfo& scaling,
                                        double rank_threshold = 1e-8);

/// Clamps the scaled polynomial values to [-1,1] and applies the input map.
Eigen::VectorXd saturate(const PolynomialController& controller, double t,
                         const Eigen::VectorXd& x);

/// Coefficients (scaled frame), scaling records and extraction diagnostics.
nlohmann::json controller_to_json(const PolynomialController& controller);

struct SimulateOptions {
  double step = 1e-3;
  double target_tolerance = 1e-2;  // slack on scaled target inequalities
};

struct SimulationEvent {
  double time = 0.0;
  std::string what;
};

struct SimulationResult {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;    // one row per grid point
  Eigen::MatrixXd controls;  // applied (saturated, original-coordinate) inputs
  double realized_cost = 0.0;
  double target_hit_time = -1.0;  // free mode; < 0 when the target was not hit
  Eigen::VectorXd terminal_state;
  std::vector<SimulationEvent> events;
};

using ControlLaw = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Fixed-step RK4 on xdot = f + g u with the running cost integrated as an
/// extra state on the same grid.
SimulationResult simulate(const OCProblem& problem, const ControlLaw& control,
                          const SimulateOptions& options = {});
SimulationResult simulate(const OCProblem& problem, const PolynomialController& controller,
                          const SimulateOptions& options = {});

struct MinTimeOracle {
  double optimal_time = 0.0;
  double switch_time = 0.0;
  double initial_control = 0.0;  // -1, 0 or +1
};

/// Analytic bang-bang solution of the double-integrator minimum-time problem.
MinTimeOracle oracle_di_mintime(const Eigen::Vector2d& x0);
/// Feedback form of the bang-bang law, usable as a ControlLaw.
Eigen::VectorXd di_bang_bang_feedback(double t, const Eigen::VectorXd& x);

struct LqrOracle {
  double optimal_cost = 0.0;
  Eigen::VectorXd gain_times;
  Eigen::MatrixXd gains;  // row i: K(t_i), u = -K x
};

/// Finite-horizon Riccati cost for xdot = (x2, u), cost q|x|^2 + r u^2 on
/// [0, T] with zero terminal weight, integrated backward with RK4.
LqrOracle lqr_riccati_cost(double q, double r, double T, const Eigen::Vector2d& x0,
                           double dt = 1e-4);
/// Reference for the di_lqr benchmark (q=1, r=20, T=5, x0=(1,1)).
LqrOracle oracle_di_lqr();

}  // namespace momsyn
