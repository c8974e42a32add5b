#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "momsyn/ocp.hpp"

using namespace momsyn;

TEST_CASE("builtin problems validate cleanly") {
  for (const auto& name : builtin_problem_names()) {
    const OCProblem p = builtin_problem(name);
    const auto diags = validate(p);
    for (const auto& d : diags) MESSAGE(name, ": ", d.code, " ", d.message);
    CHECK(diags.empty());
  }
  CHECK_THROWS_AS(builtin_problem("nope"), std::invalid_argument);
}

TEST_CASE("builtin data matches the benchmark definitions") {
  const OCProblem mintime = builtin_problem("di_mintime");
  CHECK(mintime.x0[0] == doctest::Approx(0.3));
  CHECK(mintime.x0[1] == doctest::Approx(1.0));
  CHECK(mintime.horizon == 3.0);
  CHECK(mintime.time_mode == TimeMode::kFree);
  // Target {(0,0)}: -xi^2 >= 0 plus the enclosing box.
  CHECK(mintime.XT.inequalities.size() == 4);
  CHECK(mintime.XT.inequalities[0].evaluate(Eigen::Vector2d(0.1, 0.0)) < 0.0);
  CHECK(mintime.XT.inequalities[0].evaluate(Eigen::Vector2d(0.0, 0.5)) == 0.0);

  const OCProblem lqr = builtin_problem("di_lqr");
  Eigen::VectorXd z(4);
  z << 0.0, 1.0, 1.0, 0.0;  // (t, x, u)
  CHECK(lqr.running_cost.evaluate(z) == doctest::Approx(2.0));
  CHECK(lqr.horizon == 5.0);
  CHECK(lqr.time_mode == TimeMode::kFixed);

  const OCProblem dubins = builtin_problem("dubins_lqr");
  CHECK(dubins.U.lower[0] == 0.0);
  CHECK(dubins.U.upper[0] == 1.0);
  CHECK(dubins.U.lower[1] == -3.0);
  CHECK(dubins.U.upper[1] == 3.0);
  CHECK(dubins.x0[0] == doctest::Approx(-0.8));
  // Taylor model: x1' = V (1 - theta^2/2) at theta = 0.4, V = 1.
  Eigen::VectorXd zt(4);
  zt << 0.0, 0.0, 0.0, 0.4;
  CHECK(dubins.g[0][0].evaluate(zt) == doctest::Approx(1.0 - 0.08));
  CHECK(dubins.g[1][0].evaluate(zt) == doctest::Approx(0.4));
  CHECK(dubins.g[2][1].evaluate(zt) == doctest::Approx(1.0));
  CHECK(dubins.f[0].is_zero());
}

TEST_CASE("validate flags bad problems") {
  OCProblem p = builtin_problem("di_lqr");
  p.x0 = Eigen::Vector2d(5.0, 5.0);
  auto diags = validate(p);
  REQUIRE(!diags.empty());
  bool found = false;
  for (const auto& d : diags) found = found || d.code == "x0-infeasible";
  CHECK(found);

  OCProblem q = builtin_problem("di_lqr");
  q.U.lower = Eigen::VectorXd::Constant(2, -1.0);  // m mismatch vs g
  q.U.upper = Eigen::VectorXd::Constant(2, 1.0);
  q.m = 2;
  diags = validate(q);
  found = false;
  for (const auto& d : diags) found = found || d.code == "dimension";
  CHECK(found);

  OCProblem r = builtin_problem("di_lqr");
  r.X.inequalities.clear();  // no enclosing box derivable
  diags = validate(r);
  found = false;
  for (const auto& d : diags) found = found || d.code == "non-compact";
  CHECK(found);

  OCProblem s = builtin_problem("di_lqr");
  s.horizon = 0.0;
  diags = validate(s);
  found = false;
  for (const auto& d : diags) found = found || d.code == "horizon";
  CHECK(found);
}

TEST_CASE("bounding box extraction") {
  const auto box = bounding_box(builtin_problem("di_lqr").X);
  REQUIRE(box.has_value());
  CHECK(box->lower[0] == doctest::Approx(-2.0));
  CHECK(box->upper[1] == doctest::Approx(2.0));

  const auto dubins_box = bounding_box(builtin_problem("dubins_lqr").X);
  REQUIRE(dubins_box.has_value());
  CHECK(dubins_box->upper[2] == doctest::Approx(M_PI));

  // Half-line pairs work too.
  SemialgebraicSet halves;
  halves.nvars = 1;
  const Polynomial x = Polynomial::variable(1, 0);
  halves.inequalities = {x + Polynomial::constant(1, 1.0), Polynomial::constant(1, 2.0) - x};
  const auto hb = bounding_box(halves);
  REQUIRE(hb.has_value());
  CHECK(hb->lower[0] == doctest::Approx(-1.0));
  CHECK(hb->upper[0] == doctest::Approx(2.0));

  // Unbounded variable: no box.
  SemialgebraicSet open;
  open.nvars = 1;
  open.inequalities = {x};
  CHECK(!bounding_box(open).has_value());
}

TEST_CASE("normalize_inputs: dubins box and scalar cases") {
  const NormalizedProblem dubins = normalize_inputs(builtin_problem("dubins_lqr"));
  CHECK(dubins.input_map.offset[0] == doctest::Approx(0.5));
  CHECK(dubins.input_map.offset[1] == doctest::Approx(0.0));
  CHECK(dubins.input_map.scale[0] == doctest::Approx(0.5));
  CHECK(dubins.input_map.scale[1] == doctest::Approx(3.0));
  CHECK(dubins.problem.U.lower[0] == -1.0);
  CHECK(dubins.problem.U.upper[1] == 1.0);

  // Already normalized: identity map, problem unchanged.
  const OCProblem di = builtin_problem("di_lqr");
  const NormalizedProblem same = normalize_inputs(di);
  CHECK(same.input_map.offset[0] == 0.0);
  CHECK(same.input_map.scale[0] == 1.0);
  CHECK(same.problem.g[1][0].near_equal(di.g[1][0], 0.0));
  CHECK(same.problem.running_cost.near_equal(di.running_cost, 0.0));

  // U = [-2, 2]: centered, doubled g.
  OCProblem wide = di;
  wide.U.lower = Eigen::VectorXd::Constant(1, -2.0);
  wide.U.upper = Eigen::VectorXd::Constant(1, 2.0);
  const NormalizedProblem wn = normalize_inputs(wide);
  CHECK(wn.input_map.offset[0] == 0.0);
  CHECK(wn.input_map.scale[0] == 2.0);
  CHECK(wn.problem.g[1][0].coeff(MultiIndex::zeros(3)) == doctest::Approx(2.0));

  OCProblem degenerate = di;
  degenerate.U.upper[0] = degenerate.U.lower[0];
  CHECK_THROWS_AS(normalize_inputs(degenerate), std::invalid_argument);
}

TEST_CASE("normalization preserves dynamics and cost pointwise") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const OCProblem p = builtin_problem("dubins_lqr");
  const NormalizedProblem np = normalize_inputs(p);
  const int n = p.n, m = p.m;

  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd tx(1 + n);
    for (int i = 0; i <= n; ++i) tx[i] = unit(rng);
    Eigen::VectorXd u_norm(m);
    for (int j = 0; j < m; ++j) u_norm[j] = unit(rng);
    const Eigen::VectorXd u_orig = np.input_map.apply(u_norm);

    for (int i = 0; i < n; ++i) {
      double f_orig = p.f[static_cast<size_t>(i)].evaluate(tx);
      double f_norm = np.problem.f[static_cast<size_t>(i)].evaluate(tx);
      for (int j = 0; j < m; ++j) {
        f_orig += p.g[static_cast<size_t>(i)][static_cast<size_t>(j)].evaluate(tx) * u_orig[j];
        f_norm += np.problem.g[static_cast<size_t>(i)][static_cast<size_t>(j)].evaluate(tx) * u_norm[j];
      }
      CHECK(std::abs(f_norm - f_orig) <= 1e-12 * std::max(1.0, std::abs(f_orig)));
    }

    Eigen::VectorXd txu(1 + n + m), txu_orig(1 + n + m);
    txu.head(1 + n) = tx;
    txu.tail(m) = u_norm;
    txu_orig.head(1 + n) = tx;
    txu_orig.tail(m) = u_orig;
    const double h_orig = p.running_cost.evaluate(txu_orig);
    const double h_norm = np.problem.running_cost.evaluate(txu);
    CHECK(std::abs(h_norm - h_orig) <= 1e-12 * std::max(1.0, std::abs(h_orig)));
  }
}

TEST_CASE("problem JSON round trip") {
  namespace fs = std::filesystem;
  for (const auto& name : builtin_problem_names()) {
    const OCProblem p = builtin_problem(name);
    const nlohmann::json j = problem_to_json(p);
    const OCProblem q = problem_from_json(j);
    CHECK(q.n == p.n);
    CHECK(q.m == p.m);
    CHECK(q.horizon == p.horizon);
    CHECK(q.time_mode == p.time_mode);
    CHECK((q.x0 - p.x0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(q.running_cost.near_equal(p.running_cost, 0.0));
    for (int i = 0; i < p.n; ++i) {
      CHECK(q.f[static_cast<size_t>(i)].near_equal(p.f[static_cast<size_t>(i)], 0.0));
      for (int jj = 0; jj < p.m; ++jj) {
        CHECK(q.g[static_cast<size_t>(i)][static_cast<size_t>(jj)].near_equal(
            p.g[static_cast<size_t>(i)][static_cast<size_t>(jj)], 0.0));
      }
    }
    CHECK(q.XT.inequalities.size() == p.XT.inequalities.size());
  }

  // load_problem resolves builtin names and files.
  const fs::path path = fs::temp_directory_path() / "momsyn_test_problem.json";
  {
    std::ofstream os(path);
    os << problem_to_json(builtin_problem("di_lqr")).dump();
  }
  const OCProblem loaded = load_problem(path.string());
  CHECK(loaded.horizon == 5.0);
  fs::remove(path);
  CHECK_THROWS_AS(load_problem("/definitely/not/here.json"), std::runtime_error);
}
