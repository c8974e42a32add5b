#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "momsyn/polynomial.hpp"

namespace momsyn {

/// {x : h_i(x) >= 0 for all i}. An empty list denotes the whole space.
struct SemialgebraicSet {
  int nvars = 0;
  std::vector<Polynomial> inequalities;
};

/// Box input constraint U = [a_1,b_1] x ... x [a_m,b_m].
struct InputBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
};

enum class TimeMode { kFixed, kFree };

std::string to_string(TimeMode mode);
TimeMode time_mode_from_string(const std::string& s);

/// Optimal control problem statement:
///   xdot = f(t,x) + g(t,x) u,   u in U,  x in X,  x(0) = x0,  x(T) in XT,
///   minimize  integral h(t,x,u) dt + H(x(T)).
/// Fixed mode runs exactly to `horizon`; free mode stops at the first time the
/// target is reached, no later than `horizon`.
struct OCProblem {
  int n = 0;
  int m = 0;
  std::vector<Polynomial> f;               // n entries over (t, x)
  std::vector<std::vector<Polynomial>> g;  // n x m over (t, x)
  Polynomial running_cost;                 // over (t, x, u)
  Polynomial terminal_cost;                // over x
  SemialgebraicSet X;                      // over x
  SemialgebraicSet XT;                     // over x
  InputBox U;
  Eigen::VectorXd x0;
  double horizon = 0.0;
  TimeMode time_mode = TimeMode::kFixed;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

/// u_original = offset + scale .* u_normalized (scale is the diagonal of D).
struct AffineInputMap {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  Eigen::VectorXd apply(const Eigen::VectorXd& u_norm) const {
    return offset + scale.cwiseProduct(u_norm);
  }
};

/// Problem rewritten so that U = [-1,1]^m, together with the map back to the
/// original input coordinates.
struct NormalizedProblem {
  OCProblem problem;
  AffineInputMap input_map;
};

/// Per-variable bounds [lower_i, upper_i] recovered from a set description.
struct VariableBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
  Eigen::VectorXd halfwidth() const { return 0.5 * (upper - lower); }
};

/// Extracts per-variable bounds from the univariate inequalities of a set
/// description (degree-1 half-lines and concave degree-2 intervals). Returns
/// nullopt when some variable is left unbounded.
std::optional<VariableBox> bounding_box(const SemialgebraicSet& set);

/// Structural checks; an empty result means the problem is well formed.
std::vector<Diagnostic> validate(const OCProblem& problem);

/// Shifts and scales g (and rewrites f, h) so the input box becomes [-1,1]^m.
NormalizedProblem normalize_inputs(const OCProblem& problem);

/// Benchmark problems: di_mintime, di_lqr, dubins_lqr.
OCProblem builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();

nlohmann::json problem_to_json(const OCProblem& problem);
OCProblem problem_from_json(const nlohmann::json& j);
OCProblem load_problem(const std::string& path_or_builtin);

nlohmann::json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j, int nvars);

}  // namespace momsyn
