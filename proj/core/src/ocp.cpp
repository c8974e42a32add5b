#include "momsyn/ocp.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace momsyn {

namespace {
constexpr double kX0FeasibilityTol = 1e-9;
}

std::string to_string(TimeMode mode) {
  return mode == TimeMode::kFixed ? "fixed" : "free";
}

TimeMode time_mode_from_string(const std::string& s) {
  if (s == "fixed") return TimeMode::kFixed;
  if (s == "free") return TimeMode::kFree;
  throw std::invalid_argument("unknown time mode: " + s);
}

std::optional<VariableBox> bounding_box(const SemialgebraicSet& set) {
  const int n = set.nvars;
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -inf);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, inf);

  for (const Polynomial& p : set.inequalities) {
    // Only univariate constraints yield direct bounds.
    int var = -1;
    bool univariate = true;
    for (const auto& [mi, c] : p.terms()) {
      for (int i = 0; i < n; ++i) {
        if (mi[i] > 0) {
          if (var == -1) var = i;
          else if (var != i) univariate = false;
        }
      }
    }
    if (!univariate || var == -1) continue;

    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    bool low_order = true;
    for (const auto& [mi, c] : p.terms()) {
      switch (mi[var]) {
        case 0: c0 = c; break;
        case 1: c1 = c; break;
        case 2: c2 = c; break;
        default: low_order = false;
      }
    }
    if (!low_order) continue;

    if (c2 == 0.0 && c1 != 0.0) {
      // c0 + c1*x >= 0
      const double bound = -c0 / c1;
      if (c1 > 0.0) lo[var] = std::max(lo[var], bound);
      else hi[var] = std::min(hi[var], bound);
    } else if (c2 < 0.0) {
      // Concave quadratic: feasible between the roots (empty if none).
      const double disc = c1 * c1 - 4.0 * c2 * c0;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      const double r1 = (-c1 + sq) / (2.0 * c2);
      const double r2 = (-c1 - sq) / (2.0 * c2);
      lo[var] = std::max(lo[var], std::min(r1, r2));
      hi[var] = std::min(hi[var], std::max(r1, r2));
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) return std::nullopt;
  }
  return VariableBox{lo, hi};
}

std::vector<Diagnostic> validate(const OCProblem& problem) {
  std::vector<Diagnostic> out;
  auto add = [&out](const std::string& code, const std::string& msg) {
    out.push_back({code, msg});
  };

  const int n = problem.n, m = problem.m;
  if (n < 1) add("dimension", "state dimension must be >= 1");
  if (m < 1) add("dimension", "input dimension must be >= 1");
  if (static_cast<int>(problem.f.size()) != n) add("dimension", "f must have n entries");
  if (static_cast<int>(problem.g.size()) != n) add("dimension", "g must have n rows");
  for (const auto& row : problem.g) {
    if (static_cast<int>(row.size()) != m) add("dimension", "g must have m columns");
  }
  for (const auto& fi : problem.f) {
    if (fi.nvars() != n + 1) add("dimension", "f entries must live over (t, x)");
  }
  for (const auto& row : problem.g) {
    for (const auto& gij : row) {
      if (gij.nvars() != n + 1) add("dimension", "g entries must live over (t, x)");
    }
  }
  if (problem.running_cost.nvars() != 1 + n + m) add("dimension", "h must live over (t, x, u)");
  if (problem.terminal_cost.nvars() != n) add("dimension", "H must live over x");
  if (problem.X.nvars != n) add("dimension", "X must live over x");
  if (problem.XT.nvars != n) add("dimension", "XT must live over x");
  if (problem.U.dim() != m || problem.U.upper.size() != m) {
    add("dimension", "input box must have m components");
  }
  if (problem.x0.size() != n) add("dimension", "x0 must have n entries");
  if (!out.empty()) return out;  // Remaining checks assume consistent shapes.

  if (!(problem.horizon > 0.0)) add("horizon", "horizon must be positive");
  for (int j = 0; j < m; ++j) {
    if (!(problem.U.lower[j] < problem.U.upper[j])) {
      add("input-box", "degenerate input interval for component " + std::to_string(j));
    }
  }

  for (const Polynomial& h : problem.X.inequalities) {
    if (h.evaluate(problem.x0) < -kX0FeasibilityTol) {
      add("x0-infeasible", "x0 violates a state constraint: " + h.str());
    }
  }

  if (!bounding_box(problem.X).has_value()) {
    add("non-compact", "X has no derivable enclosing box; add box inequalities");
  }
  return out;
}

NormalizedProblem normalize_inputs(const OCProblem& problem) {
  const int n = problem.n, m = problem.m;
  Eigen::VectorXd c(m), d(m);
  for (int j = 0; j < m; ++j) {
    const double a = problem.U.lower[j], b = problem.U.upper[j];
    if (!(a < b)) throw std::invalid_argument("normalize_inputs: degenerate input interval");
    c[j] = 0.5 * (a + b);
    d[j] = 0.5 * (b - a);
  }

  NormalizedProblem out;
  out.input_map = AffineInputMap{c, d};
  OCProblem& q = out.problem;
  q = problem;

  // u = c + D u'  =>  f <- f + g c,  g <- g D.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      q.f[i] = q.f[i] + problem.g[i][j].scaled(c[j]);
      q.g[i][j] = problem.g[i][j].scaled(d[j]);
    }
  }
  Polynomial h = problem.running_cost;
  for (int j = 0; j < m; ++j) {
    h = h.substitute_affine(1 + n + j, c[j], d[j]);
  }
  q.running_cost = h;
  q.U.lower = Eigen::VectorXd::Constant(m, -1.0);
  q.U.upper = Eigen::VectorXd::Constant(m, 1.0);
  return out;
}

namespace {

Polynomial box_inequality(int nvars, int var, double lo, double hi) {
  // (x - lo)(hi - x), nonnegative exactly on [lo, hi].
  const Polynomial x = Polynomial::variable(nvars, var);
  return (x - Polynomial::constant(nvars, lo)) * (Polynomial::constant(nvars, hi) - x);
}

OCProblem double_integrator_base() {
  OCProblem p;
  p.n = 2;
  p.m = 1;
  const int tv = 3;  // (t, x1, x2)
  p.f = {Polynomial::variable(tv, 2), Polynomial::zero(tv)};
  p.g = {{Polynomial::zero(tv)}, {Polynomial::constant(tv, 1.0)}};
  p.X.nvars = 2;
  p.X.inequalities = {box_inequality(2, 0, -2.0, 2.0), box_inequality(2, 1, -2.0, 2.0)};
  p.U.lower = Eigen::VectorXd::Constant(1, -1.0);
  p.U.upper = Eigen::VectorXd::Constant(1, 1.0);
  return p;
}

}  // namespace

OCProblem builtin_problem(const std::string& name) {
  if (name == "di_mintime") {
    OCProblem p = double_integrator_base();
    p.running_cost = Polynomial::constant(4, 1.0);
    p.terminal_cost = Polynomial::zero(2);
    // Target {(0,0)}: -x1^2 >= 0 and -x2^2 >= 0, plus the enclosing box.
    const Polynomial x1 = Polynomial::variable(2, 0);
    const Polynomial x2 = Polynomial::variable(2, 1);
    p.XT.nvars = 2;
    p.XT.inequalities = {(x1 * x1).scaled(-1.0), (x2 * x2).scaled(-1.0)};
    for (const auto& h : p.X.inequalities) p.XT.inequalities.push_back(h);
    p.x0 = Eigen::Vector2d(0.3, 1.0);
    p.horizon = 3.0;
    p.time_mode = TimeMode::kFree;
    return p;
  }
  if (name == "di_lqr") {
    OCProblem p = double_integrator_base();
    // h = x1^2 + x2^2 + 20 u^2 over (t, x1, x2, u).
    const Polynomial x1 = Polynomial::variable(4, 1);
    const Polynomial x2 = Polynomial::variable(4, 2);
    const Polynomial u = Polynomial::variable(4, 3);
    p.running_cost = x1 * x1 + x2 * x2 + (u * u).scaled(20.0);
    p.terminal_cost = Polynomial::zero(2);
    p.XT = p.X;
    p.x0 = Eigen::Vector2d(1.0, 1.0);
    p.horizon = 5.0;
    p.time_mode = TimeMode::kFixed;
    return p;
  }
  if (name == "dubins_lqr") {
    OCProblem p;
    p.n = 3;
    p.m = 2;
    const int tv = 4;  // (t, x1, x2, theta)
    const Polynomial theta = Polynomial::variable(tv, 3);
    const Polynomial one = Polynomial::constant(tv, 1.0);
    // Second-order Taylor model of the unicycle around theta = 0:
    //   x1' = V (1 - theta^2/2),  x2' = V theta,  theta' = w.
    p.f = {Polynomial::zero(tv), Polynomial::zero(tv), Polynomial::zero(tv)};
    p.g = {
        {one - (theta * theta).scaled(0.5), Polynomial::zero(tv)},
        {theta, Polynomial::zero(tv)},
        {Polynomial::zero(tv), Polynomial::constant(tv, 1.0)},
    };
    const int hv = 6;  // (t, x1, x2, theta, V, w)
    const Polynomial hx1 = Polynomial::variable(hv, 1) - Polynomial::constant(hv, 0.5);
    const Polynomial hx2 = Polynomial::variable(hv, 2) + Polynomial::constant(hv, 0.4);
    const Polynomial hV = Polynomial::variable(hv, 4);
    const Polynomial hw = Polynomial::variable(hv, 5);
    p.running_cost = hx1 * hx1 + hx2 * hx2 + hV * hV + (hw * hw).scaled(1.0 / 9.0);
    p.terminal_cost = Polynomial::zero(3);
    const double pi = std::numbers::pi;
    p.X.nvars = 3;
    p.X.inequalities = {box_inequality(3, 0, -1.0, 1.0), box_inequality(3, 1, -1.0, 1.0),
                        box_inequality(3, 2, -pi, pi)};
    p.XT = p.X;
    p.U.lower = Eigen::Vector2d(0.0, -3.0);
    p.U.upper = Eigen::Vector2d(1.0, 3.0);
    p.x0 = Eigen::Vector3d(-0.8, 0.8, 0.0);
    // Horizon 3; run as fixed terminal time. With XT equal to the whole box,
    // a free stop time makes the zero-duration trajectory optimal (cost 0)
    // and leaves nothing to extract, so the LQR benchmark pins T = 3.
    p.horizon = 3.0;
    p.time_mode = TimeMode::kFixed;
    return p;
  }
  throw std::invalid_argument("unknown builtin problem: " + name);
}

std::vector<std::string> builtin_problem_names() {
  return {"di_mintime", "di_lqr", "dubins_lqr"};
}

nlohmann::json polynomial_to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [mi, c] : p.terms()) {
    terms.push_back({{"coeff", c}, {"exps", mi.exponents()}});
  }
  return terms;
}

Polynomial polynomial_from_json(const nlohmann::json& j, int nvars) {
  Polynomial p(nvars);
  for (const auto& term : j) {
    const std::vector<int> exps = term.at("exps").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != nvars) {
      throw std::invalid_argument("polynomial record has wrong exponent count");
    }
    p.add_term(MultiIndex(exps), term.at("coeff").get<double>());
  }
  return p;
}

nlohmann::json problem_to_json(const OCProblem& p) {
  nlohmann::json j;
  j["n"] = p.n;
  j["m"] = p.m;
  nlohmann::json f = nlohmann::json::array();
  for (const auto& fi : p.f) f.push_back(polynomial_to_json(fi));
  j["f"] = f;
  nlohmann::json g = nlohmann::json::array();
  for (const auto& row : p.g) {
    nlohmann::json jrow = nlohmann::json::array();
    for (const auto& gij : row) jrow.push_back(polynomial_to_json(gij));
    g.push_back(jrow);
  }
  j["g"] = g;
  j["h"] = polynomial_to_json(p.running_cost);
  j["H"] = polynomial_to_json(p.terminal_cost);
  nlohmann::json X = nlohmann::json::array();
  for (const auto& hi : p.X.inequalities) X.push_back(polynomial_to_json(hi));
  j["X"] = X;
  nlohmann::json XT = nlohmann::json::array();
  for (const auto& hi : p.XT.inequalities) XT.push_back(polynomial_to_json(hi));
  j["XT"] = XT;
  j["U"] = {{"lower", std::vector<double>(p.U.lower.begin(), p.U.lower.end())},
            {"upper", std::vector<double>(p.U.upper.begin(), p.U.upper.end())}};
  j["x0"] = std::vector<double>(p.x0.begin(), p.x0.end());
  j["horizon"] = p.horizon;
  j["time_mode"] = to_string(p.time_mode);
  return j;
}

OCProblem problem_from_json(const nlohmann::json& j) {
  OCProblem p;
  p.n = j.at("n").get<int>();
  p.m = j.at("m").get<int>();
  const int tx = 1 + p.n;
  const int txu = 1 + p.n + p.m;
  for (const auto& fi : j.at("f")) p.f.push_back(polynomial_from_json(fi, tx));
  for (const auto& row : j.at("g")) {
    std::vector<Polynomial> r;
    for (const auto& gij : row) r.push_back(polynomial_from_json(gij, tx));
    p.g.push_back(std::move(r));
  }
  p.running_cost = polynomial_from_json(j.at("h"), txu);
  p.terminal_cost = polynomial_from_json(j.at("H"), p.n);
  p.X.nvars = p.n;
  for (const auto& hi : j.at("X")) p.X.inequalities.push_back(polynomial_from_json(hi, p.n));
  p.XT.nvars = p.n;
  for (const auto& hi : j.at("XT")) p.XT.inequalities.push_back(polynomial_from_json(hi, p.n));
  const auto lower = j.at("U").at("lower").get<std::vector<double>>();
  const auto upper = j.at("U").at("upper").get<std::vector<double>>();
  p.U.lower = Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<long>(lower.size()));
  p.U.upper = Eigen::Map<const Eigen::VectorXd>(upper.data(), static_cast<long>(upper.size()));
  const auto x0 = j.at("x0").get<std::vector<double>>();
  p.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<long>(x0.size()));
  p.horizon = j.at("horizon").get<double>();
  p.time_mode = time_mode_from_string(j.at("time_mode").get<std::string>());
  return p;
}

OCProblem load_problem(const std::string& path_or_builtin) {
  const auto names = builtin_problem_names();
  for (const auto& name : names) {
    if (name == path_or_builtin) return builtin_problem(name);
  }
  std::ifstream in(path_or_builtin);
  if (!in) throw std::runtime_error("cannot open problem file: " + path_or_builtin);
  nlohmann::json j;
  in >> j;
  return problem_from_json(j);
}

}  // namespace momsyn
