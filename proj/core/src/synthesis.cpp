#include "momsyn/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "momsyn/ocp.hpp"

namespace momsyn {

PolynomialController::PolynomialController(std::vector<Polynomial> coeffs_scaled,
                                           ScalingInfo scaling, ExtractionDiagnostics diagnostics)
    : polys_(std::move(coeffs_scaled)), scaling_(std::move(scaling)),
      diagnostics_(std::move(diagnostics)) {}

Eigen::VectorXd PolynomialController::evaluate_scaled(double tau,
                                                      const Eigen::VectorXd& x_scaled) const {
  Eigen::VectorXd point(1 + x_scaled.size());
  point[0] = tau;
  point.tail(x_scaled.size()) = x_scaled;
  Eigen::VectorXd out(num_inputs());
  for (int j = 0; j < num_inputs(); ++j) {
    out[j] = polys_[static_cast<size_t>(j)].evaluate(point);
  }
  return out;
}

Eigen::VectorXd PolynomialController::operator()(double t, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd raw = evaluate_scaled(t / scaling_.horizon, scaling_.scale_state(x));
  const Eigen::VectorXd clamped = raw.cwiseMax(-1.0).cwiseMin(1.0);
  return scaling_.input_map.apply(clamped);
}

Eigen::VectorXd saturate(const PolynomialController& controller, double t,
                         const Eigen::VectorXd& x) {
  return controller(t, x);
}

nlohmann::json controller_to_json(const PolynomialController& controller) {
  nlohmann::json j;
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& p : controller.polynomials()) polys.push_back(polynomial_to_json(p));
  j["polynomials_scaled"] = polys;
  const ScalingInfo& sc = controller.scaling();
  j["scaling"] = {
      {"horizon", sc.horizon},
      {"x_center", std::vector<double>(sc.x_center.begin(), sc.x_center.end())},
      {"x_halfwidth", std::vector<double>(sc.x_halfwidth.begin(), sc.x_halfwidth.end())},
      {"input_offset", std::vector<double>(sc.input_map.offset.begin(), sc.input_map.offset.end())},
      {"input_scale", std::vector<double>(sc.input_map.scale.begin(), sc.input_map.scale.end())},
  };
  const ExtractionDiagnostics& d = controller.diagnostics();
  j["diagnostics"] = {
      {"gamma_spectrum", std::vector<double>(d.gamma_spectrum.begin(), d.gamma_spectrum.end())},
      {"rank", d.rank},
      {"residuals", std::vector<double>(d.residuals.begin(), d.residuals.end())},
      {"mass", d.mass},
  };
  return j;
}

PolynomialController extract_controller(const ConicSolution& solution,
                                        const VariableLayout& layout, const ScalingInfo& scaling,
                                        double rank_threshold) {
  if (solution.status != SolveStatus::kOptimal && solution.status != SolveStatus::kNearOptimal) {
    throw ExtractionError("extraction requires an optimal or near_optimal solution, got " +
                          to_string(solution.status));
  }
  const int k = layout.k;
  const MomentVector y_gamma = layout.slice(MeasureKind::kGamma, 0, solution.y);
  const Eigen::MatrixXd M = moment_matrix(y_gamma, k);
  const int side = static_cast<int>(M.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::VectorXd evals = es.eigenvalues();
  const double lmax = evals.cwiseAbs().maxCoeff();
  const double mass = y_gamma.mass();
  if (lmax <= 1e-12 || mass <= 1e-10) {
    throw ExtractionError("gamma moment matrix is numerically zero (mass " +
                          std::to_string(mass) + "); no control information to extract");
  }

  const double cutoff = rank_threshold * lmax;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(side);
  int rank = 0;
  for (int i = 0; i < side; ++i) {
    if (evals[i] > cutoff) {
      inv[i] = 1.0 / evals[i];
      ++rank;
    }
  }

  ExtractionDiagnostics diag;
  diag.gamma_spectrum = evals;
  diag.rank = rank;
  diag.mass = mass;
  diag.residuals = Eigen::VectorXd::Zero(layout.m);

  std::vector<Polynomial> polys;
  polys.reserve(static_cast<size_t>(layout.m));
  for (int j = 0; j < layout.m; ++j) {
    const MomentVector yp = layout.slice(MeasureKind::kSigmaPlus, j, solution.y);
    const MomentVector ym = layout.slice(MeasureKind::kSigmaMinus, j, solution.y);
    const Eigen::VectorXd rhs = (yp.values - ym.values).head(side);
    const Eigen::VectorXd coeffs =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * rhs;
    diag.residuals[j] = (M * coeffs - rhs).norm();

    Polynomial u(1 + layout.n);
    for (int i = 0; i < side; ++i) {
      if (coeffs[i] != 0.0) u.add_term(y_gamma.basis[i], coeffs[i]);
    }
    polys.push_back(std::move(u));
  }
  return PolynomialController(std::move(polys), scaling, std::move(diag));
}

namespace {

struct TargetChecker {
  std::vector<Polynomial> scaled_inequalities;  // over scaled state only
  ScalingInfo scaling;
  double tolerance = 1e-2;

  bool reached(const Eigen::VectorXd& x_phys) const {
    const Eigen::VectorXd xs = scaling.scale_state(x_phys);
    for (const auto& h : scaled_inequalities) {
      if (h.evaluate(xs) < -tolerance) return false;
    }
    return true;
  }
};

}  // namespace

SimulationResult simulate(const OCProblem& problem, const ControlLaw& control,
                          const SimulateOptions& options) {
  if (!(options.step > 0.0)) throw std::invalid_argument("simulate: step must be positive");
  const int n = problem.n, m = problem.m;
  const auto box = bounding_box(problem.X);
  if (!box) throw std::invalid_argument("simulate: X has no derivable enclosing box");
  ScalingInfo scaling;
  scaling.horizon = problem.horizon;
  scaling.x_center = box->center();
  scaling.x_halfwidth = box->halfwidth();

  TargetChecker target;
  target.scaling = scaling;
  target.tolerance = options.target_tolerance;
  for (const auto& ht : problem.XT.inequalities) {
    target.scaled_inequalities.push_back(scale_state_polynomial(ht, *box));
  }
  const bool free_mode = problem.time_mode == TimeMode::kFree;

  const int steps = std::max(1, static_cast<int>(std::ceil(problem.horizon / options.step)));
  const double dt = problem.horizon / steps;

  auto eval_u = [&](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd u = control(t, x);
    // Keep the applied input admissible even for external control laws.
    return u.cwiseMax(problem.U.lower).cwiseMin(problem.U.upper);
  };
  auto dynamics = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd point(1 + n);
    point[0] = t;
    point.tail(n) = x;
    Eigen::VectorXd dx(n);
    for (int i = 0; i < n; ++i) {
      double v = problem.f[static_cast<size_t>(i)].evaluate(point);
      for (int j = 0; j < m; ++j) {
        v += problem.g[static_cast<size_t>(i)][static_cast<size_t>(j)].evaluate(point) * u[j];
      }
      dx[i] = v;
    }
    return dx;
  };
  auto running = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd point(1 + n + m);
    point[0] = t;
    point.segment(1, n) = x;
    point.tail(m) = u;
    return problem.running_cost.evaluate(point);
  };

  SimulationResult out;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states, controls;
  std::set<std::string> seen_events;
  auto note = [&](double t, const std::string& what) {
    if (seen_events.insert(what).second) out.events.push_back({t, what});
  };

  Eigen::VectorXd x = problem.x0;
  double cost = 0.0;
  double t = 0.0;
  times.push_back(t);
  states.push_back(x);
  controls.push_back(eval_u(t, x));

  auto check_state = [&](double tc, const Eigen::VectorXd& xc, const Eigen::VectorXd& uc) {
    const Eigen::VectorXd xs = scaling.scale_state(xc);
    if ((xs.cwiseAbs().array() > 1.1).any()) note(tc, "left_enclosing_box_10pct");
    for (const auto& h : problem.X.inequalities) {
      if (h.evaluate(xc) < -1e-6) {
        note(tc, "left_X");
        break;
      }
    }
    for (int j = 0; j < m; ++j) {
      if (uc[j] <= problem.U.lower[j] + 1e-12 || uc[j] >= problem.U.upper[j] - 1e-12) {
        note(tc, "saturation_active");
        break;
      }
    }
  };
  check_state(t, x, controls.back());

  bool hit = free_mode && target.reached(x);
  if (hit) out.target_hit_time = 0.0;

  for (int s = 0; s < steps && !hit; ++s) {
    // RK4 on the state augmented with the running cost.
    const Eigen::VectorXd u1 = eval_u(t, x);
    const Eigen::VectorXd k1 = dynamics(t, x, u1);
    const double c1 = running(t, x, u1);

    const Eigen::VectorXd u2 = eval_u(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Eigen::VectorXd k2 = dynamics(t + 0.5 * dt, x + 0.5 * dt * k1, u2);
    const double c2 = running(t + 0.5 * dt, x + 0.5 * dt * k1, u2);

    const Eigen::VectorXd u3 = eval_u(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Eigen::VectorXd k3 = dynamics(t + 0.5 * dt, x + 0.5 * dt * k2, u3);
    const double c3 = running(t + 0.5 * dt, x + 0.5 * dt * k2, u3);

    const Eigen::VectorXd u4 = eval_u(t + dt, x + dt * k3);
    const Eigen::VectorXd k4 = dynamics(t + dt, x + dt * k3, u4);
    const double c4 = running(t + dt, x + dt * k3, u4);

    x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    cost += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    t = (s + 1) * dt;

    times.push_back(t);
    states.push_back(x);
    controls.push_back(eval_u(t, x));
    check_state(t, x, controls.back());

    if (free_mode && target.reached(x)) {
      hit = true;
      out.target_hit_time = t;
      note(t, "target_reached");
    }
  }

  out.realized_cost = cost + problem.terminal_cost.evaluate(x);
  out.terminal_state = x;
  const int np = static_cast<int>(times.size());
  out.times = Eigen::Map<const Eigen::VectorXd>(times.data(), np);
  out.states.resize(np, n);
  out.controls.resize(np, m);
  for (int i = 0; i < np; ++i) {
    out.states.row(i) = states[static_cast<size_t>(i)].transpose();
    out.controls.row(i) = controls[static_cast<size_t>(i)].transpose();
  }
  return out;
}

SimulationResult simulate(const OCProblem& problem, const PolynomialController& controller,
                          const SimulateOptions& options) {
  return simulate(
      problem, [&controller](double t, const Eigen::VectorXd& x) { return controller(t, x); },
      options);
}

MinTimeOracle oracle_di_mintime(const Eigen::Vector2d& x0) {
  const double x1 = x0[0], x2 = x0[1];
  const double s = x1 + 0.5 * x2 * std::abs(x2);
  MinTimeOracle out;
  if (s > 0.0) {
    // u = -1 until the switching curve, then u = +1 into the origin.
    out.optimal_time = x2 + 2.0 * std::sqrt(0.5 * x2 * x2 + x1);
    out.switch_time = x2 + std::sqrt(0.5 * x2 * x2 + x1);
    out.initial_control = -1.0;
  } else if (s < 0.0) {
    out.optimal_time = -x2 + 2.0 * std::sqrt(0.5 * x2 * x2 - x1);
    out.switch_time = -x2 + std::sqrt(0.5 * x2 * x2 - x1);
    out.initial_control = 1.0;
  } else {
    out.optimal_time = std::abs(x2);
    out.switch_time = 0.0;
    out.initial_control = x2 > 0.0 ? -1.0 : (x2 < 0.0 ? 1.0 : 0.0);
  }
  return out;
}

Eigen::VectorXd di_bang_bang_feedback(double /*t*/, const Eigen::VectorXd& x) {
  const double s = x[0] + 0.5 * x[1] * std::abs(x[1]);
  Eigen::VectorXd u(1);
  if (std::abs(s) > 1e-12) {
    u[0] = s > 0.0 ? -1.0 : 1.0;
  } else if (std::abs(x[1]) > 1e-12) {
    u[0] = x[1] > 0.0 ? -1.0 : 1.0;
  } else {
    u[0] = 0.0;
  }
  return u;
}

LqrOracle lqr_riccati_cost(double q, double r, double T, const Eigen::Vector2d& x0, double dt) {
  // Backward Riccati for A = [[0,1],[0,0]], B = (0,1)', Q = q I, R = r,
  // P(T) = 0, integrated in the reversed time s = T - t.
  const Eigen::Matrix2d A = (Eigen::Matrix2d() << 0, 1, 0, 0).finished();
  const Eigen::Vector2d B(0, 1);
  const Eigen::Matrix2d Q = q * Eigen::Matrix2d::Identity();

  auto rhs = [&](const Eigen::Matrix2d& P) -> Eigen::Matrix2d {
    return A.transpose() * P + P * A - P * B * B.transpose() * P / r + Q;
  };

  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt)));
  const double h = T / steps;
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();

  const int sample_stride = std::max(1, steps / 1000);
  std::vector<double> gt;
  std::vector<Eigen::Vector2d> gk;
  gt.push_back(T);
  gk.push_back(B.transpose() * P / r);

  for (int s = 0; s < steps; ++s) {
    const Eigen::Matrix2d k1 = rhs(P);
    const Eigen::Matrix2d k2 = rhs(P + 0.5 * h * k1);
    const Eigen::Matrix2d k3 = rhs(P + 0.5 * h * k2);
    const Eigen::Matrix2d k4 = rhs(P + h * k3);
    P += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    P = 0.5 * (P + P.transpose()).eval();
    if ((s + 1) % sample_stride == 0 || s + 1 == steps) {
      gt.push_back(T - (s + 1) * h);
      gk.push_back(B.transpose() * P / r);
    }
  }

  LqrOracle out;
  out.optimal_cost = x0.dot(P * x0);
  const int np = static_cast<int>(gt.size());
  out.gain_times.resize(np);
  out.gains.resize(np, 2);
  // Stored backward; flip so gain_times ascend from 0 to T.
  for (int i = 0; i < np; ++i) {
    out.gain_times[i] = gt[static_cast<size_t>(np - 1 - i)];
    out.gains.row(i) = gk[static_cast<size_t>(np - 1 - i)].transpose();
  }
  return out;
}

LqrOracle oracle_di_lqr() { return lqr_riccati_cost(1.0, 20.0, 5.0, Eigen::Vector2d(1.0, 1.0)); }

}  // namespace momsyn
