#include <doctest.h>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "momsyn/relaxation.hpp"
#include "testing_oracles.hpp"

using namespace momsyn;

namespace {

Relaxation build_di(const std::string& name, int k) {
  RelaxationConfig config;
  config.k = k;
  return build_relaxation(normalize_inputs(builtin_problem(name)), config);
}

double row_residual(const ConicProblem& cp, const Eigen::VectorXd& y) {
  double r = 0.0;
  for (int i = 0; i < cp.num_rows(); ++i) {
    double s = -cp.b[i];
    for (const auto& [idx, v] : cp.rows[static_cast<size_t>(i)]) s += v * y[idx];
    r = std::max(r, std::abs(s));
  }
  return r;
}

}  // namespace

TEST_CASE("layout sizes for the double integrator") {
  const Relaxation rel = build_di("di_lqr", 2);  // fixed mode
  const VariableLayout& layout = rel.layout;
  CHECK(layout.find(MeasureKind::kMu).basis.size() == 70);     // C(4+4,4)
  CHECK(layout.find(MeasureKind::kMuT).basis.size() == 15);    // C(2+4,4)
  CHECK(layout.find(MeasureKind::kGamma).basis.size() == 35);  // C(3+4,4)
  CHECK(layout.measures.size() == 6);  // mu, muT, gamma, sigma+/-/^ for m=1

  int expect = 0;
  for (const auto& ms : layout.measures) {
    CHECK(ms.offset == expect);
    expect += ms.size();
  }
  CHECK(layout.total == expect);

  // Free mode carries muT over (t, x).
  const Relaxation free_rel = build_di("di_mintime", 2);
  CHECK(free_rel.layout.find(MeasureKind::kMuT).basis.size() == 35);

  // Dubins (n=3, m=2, fixed): counts follow the binomial formulas.
  const Relaxation dub = build_di("dubins_lqr", 3);
  CHECK(dub.layout.measures.size() == 9);
  CHECK(dub.layout.total ==
        binomial(6 + 6, 6) + binomial(3 + 6, 6) + 7 * binomial(4 + 6, 6));
}

TEST_CASE("minimum admissible order") {
  const ScaledProblem sp = scale_problem(normalize_inputs(builtin_problem("di_lqr")));
  CHECK(min_relaxation_order(sp) == 2);
  CHECK_THROWS_AS(make_layout(sp, 1), std::invalid_argument);
  CHECK_NOTHROW(make_layout(sp, 2));

  // Dubins has quadratic g entries, so the Lie degree raise pushes the
  // minimum order to 3.
  const ScaledProblem dub = scale_problem(normalize_inputs(builtin_problem("dubins_lqr")));
  CHECK(min_relaxation_order(dub) == 3);
  CHECK_THROWS_AS(make_layout(dub, 2), std::invalid_argument);
}

TEST_CASE("liouville rows: mass and first-moment structure") {
  const Relaxation rel = build_di("di_mintime", 2);  // free mode
  const ScaledProblem& sp = rel.scaled;
  const VariableLayout& layout = rel.layout;
  const auto rows = liouville_rows(sp, layout);

  const MeasureSpace& muT = layout.find(MeasureKind::kMuT);

  // v = 1: L_F v = 0 and v(0, x0) = 1, so the row pins the muT mass to one.
  const EqualityRow& mass_row = rows[0];
  REQUIRE(mass_row.coeffs.size() == 1);
  CHECK(mass_row.coeffs[0].first == muT.offset + 0);
  CHECK(mass_row.coeffs[0].second == doctest::Approx(-1.0));
  CHECK(mass_row.rhs == doctest::Approx(-1.0));

  // v = x1 (scaled): L_F v = (T w2 / w1) x2s and rhs = -x0s_1 = -0.15.
  const MonomialBasis tests(1 + 2, test_degree_cap(sp, 2));
  int idx_x1 = -1;
  for (int i = 0; i < tests.size(); ++i) {
    if (tests[i].exponents() == std::vector<int>{0, 1, 0}) idx_x1 = i;
  }
  REQUIRE(idx_x1 >= 0);
  const EqualityRow& row_x1 = rows[static_cast<size_t>(idx_x1)];
  CHECK(row_x1.rhs == doctest::Approx(-0.15));

  const MeasureSpace& mu = layout.find(MeasureKind::kMu);
  bool found_mu_x2 = false;
  for (const auto& [idx, v] : row_x1.coeffs) {
    if (idx == mu.offset + mu.basis.position(MultiIndex({0, 0, 1, 0}))) {
      CHECK(v == doctest::Approx(3.0));  // T0 * (w2 / w1) with w1 = w2
      found_mu_x2 = true;
    }
  }
  CHECK(found_mu_x2);
}

TEST_CASE("dynamics-split rows and redundancy filtering") {
  const Relaxation rel = build_di("di_mintime", 2);
  const auto rows = dynamics_split_rows(rel.scaled, rel.layout);

  // v = x2: L_F x2 - L_f x2 = (T/w2) u, so the row ties riesz_mu(u) to the
  // sigma masses.
  const MonomialBasis tests(3, test_degree_cap(rel.scaled, 2));
  int idx_x2 = -1;
  for (int i = 0; i < tests.size(); ++i) {
    if (tests[i].exponents() == std::vector<int>{0, 0, 1}) idx_x2 = i;
  }
  REQUIRE(idx_x2 >= 0);
  const EqualityRow& row = rows[static_cast<size_t>(idx_x2)];
  const MeasureSpace& mu = rel.layout.find(MeasureKind::kMu);
  const MeasureSpace& sp_ = rel.layout.find(MeasureKind::kSigmaPlus, 0);
  const MeasureSpace& sm = rel.layout.find(MeasureKind::kSigmaMinus, 0);
  const double coef_u = 3.0 / 2.0;  // T0 / w2
  int hits = 0;
  for (const auto& [idx, v] : row.coeffs) {
    if (idx == mu.offset + mu.basis.position(MultiIndex({0, 0, 0, 1}))) {
      CHECK(v == doctest::Approx(coef_u));
      ++hits;
    } else if (idx == sp_.offset) {
      CHECK(v == doctest::Approx(-coef_u));
      ++hits;
    } else if (idx == sm.offset) {
      CHECK(v == doctest::Approx(coef_u));
      ++hits;
    }
  }
  CHECK(hits == 3);

  // v = 1 produces an identically zero row; every pure-time test gives a
  // dynamics row that duplicates a marginal row. The filter drops them.
  const ConicProblem& cp = rel.conic;
  CHECK(cp.meta.dropped_rows >= 2);
  const int d_v = test_degree_cap(rel.scaled, 2);
  const int tests_count = binomial(3 + d_v, d_v);
  const int tx_count = binomial(3 + 4, 4);
  CHECK(cp.num_rows() == 2 * tests_count + 2 * tx_count - cp.meta.dropped_rows);
}

TEST_CASE("box and marginal rows") {
  const Relaxation rel = build_di("di_mintime", 2);
  const VariableLayout& layout = rel.layout;
  const auto box_rows = box_decomposition_rows(layout);
  const auto marg_rows = marginal_rows(layout);

  const int tx_count = binomial(3 + 4, 4);  // C(1+n+2k, 2k)
  CHECK(static_cast<int>(box_rows.size()) == layout.m * tx_count);
  CHECK(static_cast<int>(marg_rows.size()) == tx_count);

  // Constant-monomial box row: sigma masses sum to gamma's mass.
  const MeasureSpace& gamma = layout.find(MeasureKind::kGamma);
  const EqualityRow& row0 = box_rows[0];
  REQUIRE(row0.coeffs.size() == 4);
  double gamma_coef = 0.0;
  for (const auto& [idx, v] : row0.coeffs) {
    if (idx == gamma.offset) gamma_coef = v;
  }
  CHECK(gamma_coef == doctest::Approx(-1.0));

  // Marginal rows only reference u-free mu monomials.
  const MeasureSpace& mu = layout.find(MeasureKind::kMu);
  for (const auto& row : marg_rows) {
    for (const auto& [idx, v] : row.coeffs) {
      if (idx >= mu.offset && idx < mu.offset + mu.size()) {
        CHECK(mu.basis[idx - mu.offset][3] == 0);
      }
    }
  }
}

TEST_CASE("psd block inventory") {
  const Relaxation rel = build_di("di_lqr", 2);  // fixed, XT = X (2 ineqs)
  // 6 moment blocks; X localizers on the 5 non-terminal measures (2 each);
  // one input localizer on mu; 2 target localizers on muT; time localizers
  // on the 5 non-terminal measures.
  CHECK(rel.conic.blocks.size() == 6 + 10 + 1 + 2 + 5);

  const Relaxation free_rel = build_di("di_mintime", 2);  // free, XT = point + box
  // Free mode adds a time localizer on muT; XT carries 4 inequalities.
  CHECK(free_rel.conic.blocks.size() == 6 + 10 + 1 + 4 + 5 + 1);

  // Input localizer side at order k-1 over (t,x,u).
  for (const auto& block : rel.conic.blocks) {
    if (block.name == "mu.loc.U1") CHECK(block.side == binomial(4 + 1, 1));
    if (block.name == "mu.M") CHECK(block.side == binomial(4 + 2, 2));
  }

  for (const auto& block : free_rel.conic.blocks) {
    for (const auto& e : block.entries) {
      for (const auto& [idx, v] : e.terms) {
        CHECK(idx >= 0);
        CHECK(idx < free_rel.conic.num_vars);
      }
    }
  }
}

TEST_CASE("objective picks up running and terminal cost") {
  const Relaxation rel = build_di("di_mintime", 3);
  // h = 1, H = 0: the objective reads T0 * mass(mu), i.e. elapsed time.
  const MeasureSpace& mu = rel.layout.find(MeasureKind::kMu);
  CHECK(rel.conic.objective[mu.offset] == doctest::Approx(3.0));
  CHECK(rel.conic.objective.cwiseAbs().sum() == doctest::Approx(3.0));

  const Relaxation lqr = build_di("di_lqr", 2);
  // h = x1^2 + x2^2 + 20u^2 in the scaled frame: T (4 x1s^2 + 4 x2s^2 +
  // 20 us^2) at mu's basis positions.
  const MeasureSpace& lmu = lqr.layout.find(MeasureKind::kMu);
  const double T = 5.0;
  CHECK(lqr.conic.objective[lmu.offset + lmu.basis.position(MultiIndex({0, 2, 0, 0}))] ==
        doctest::Approx(T * 4.0));
  CHECK(lqr.conic.objective[lmu.offset + lmu.basis.position(MultiIndex({0, 0, 2, 0}))] ==
        doctest::Approx(T * 4.0));
  CHECK(lqr.conic.objective[lmu.offset + lmu.basis.position(MultiIndex({0, 0, 0, 2}))] ==
        doctest::Approx(T * 20.0));
}

TEST_CASE("only liouville rows carry a nonzero right-hand side") {
  const Relaxation rel = build_di("di_mintime", 3);
  const ConicProblem& cp = rel.conic;
  for (int i = 0; i < cp.num_rows(); ++i) {
    if (std::abs(cp.b[i]) > 0.0) {
      CHECK(cp.meta.row_tags[static_cast<size_t>(i)].substr(0, 9) == "liouville");
    }
  }
}

TEST_CASE("feasibility oracle: simulated admissible pair satisfies the rows") {
  // Double integrator under u = -1 on [0,1] from (0.3, 1) with XT = X, so
  // the endpoint is admissible. Empirical moments must satisfy every
  // equality row and land every PSD block in the cone.
  for (int k = 2; k <= 3; ++k) {
    const Relaxation rel = testing::oracle_relaxation(k);
    const Eigen::VectorXd y = testing::oracle_moment_vector(rel);
    CHECK(row_residual(rel.conic, y) <= 1e-6);

    double min_eig = 0.0;
    for (const auto& block : rel.conic.blocks) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block.evaluate(y),
                                                        Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    CHECK(min_eig >= -1e-7);
  }
}

TEST_CASE("equality rows have full row rank after the filter") {
  for (const char* name : {"di_mintime", "di_lqr"}) {
    const Relaxation rel = build_di(name, 2);
    const ConicProblem& cp = rel.conic;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(cp.num_rows(), cp.num_vars);
    for (int i = 0; i < cp.num_rows(); ++i) {
      for (const auto& [idx, v] : cp.rows[static_cast<size_t>(i)]) A(i, idx) = v;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
    qr.setThreshold(1e-10);
    CHECK(qr.rank() == cp.num_rows());
  }
}

TEST_CASE("slack row hints point at the box rows") {
  const Relaxation rel = build_di("di_mintime", 2);
  const ConicProblem& cp = rel.conic;
  CHECK(static_cast<int>(cp.meta.slack_rows.size()) == binomial(3 + 4, 4));
  for (int r : cp.meta.slack_rows) {
    CHECK(cp.meta.row_tags[static_cast<size_t>(r)].substr(0, 4) == "box:");
  }
}

TEST_CASE("config toggles: redundancy filter and test-degree cap") {
  const NormalizedProblem np = normalize_inputs(builtin_problem("di_mintime"));
  RelaxationConfig plain;
  plain.k = 2;
  const ConicProblem filtered = assemble(np, plain);

  RelaxationConfig raw = plain;
  raw.redundancy_filter = false;
  const ConicProblem unfiltered = assemble(np, raw);
  CHECK(unfiltered.num_rows() > filtered.num_rows());
  CHECK(unfiltered.meta.dropped_rows == 0);

  RelaxationConfig capped = plain;
  capped.test_degree_cap = 2;  // below the default d_v = 2k = 4
  const ConicProblem small = assemble(np, capped);
  CHECK(small.num_rows() < filtered.num_rows());
}

TEST_CASE("conic problem JSON round trip") {
  const Relaxation rel = build_di("di_lqr", 2);
  const nlohmann::json j = conic_to_json(rel.conic);
  const ConicProblem back = conic_from_json(j);
  CHECK(back.num_vars == rel.conic.num_vars);
  CHECK(back.num_rows() == rel.conic.num_rows());
  CHECK((back.objective - rel.conic.objective).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.b - rel.conic.b).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.blocks.size() == rel.conic.blocks.size());
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(rel.conic.num_vars, -1.0, 1.0);
  for (size_t i = 0; i < back.blocks.size(); ++i) {
    CHECK(back.blocks[i].side == rel.conic.blocks[i].side);
    CHECK(back.blocks[i].name == rel.conic.blocks[i].name);
    CHECK((back.blocks[i].evaluate(y) - rel.conic.blocks[i].evaluate(y)).cwiseAbs().maxCoeff() <=
          1e-14);
  }
}

TEST_CASE("scaling restates the problem on the unit frame") {
  const NormalizedProblem np = normalize_inputs(builtin_problem("di_lqr"));
  const ScaledProblem sp = scale_problem(np);
  CHECK(sp.ocp.horizon == 1.0);
  CHECK(sp.ocp.x0[0] == doctest::Approx(0.5));
  CHECK(sp.ocp.x0[1] == doctest::Approx(0.5));

  // Transported dynamics: dxs/dtau = (T/w) F(T tau, c + W xs, u).
  const double T = 5.0;
  Eigen::VectorXd zs(3);
  zs << 0.3, 0.25, -0.4;
  Eigen::VectorXd z(3);
  z << T * zs[0], 2.0 * zs[1], 2.0 * zs[2];
  const double u = 0.7;
  for (int i = 0; i < 2; ++i) {
    double rhs_phys = np.problem.f[static_cast<size_t>(i)].evaluate(z);
    rhs_phys += np.problem.g[static_cast<size_t>(i)][0].evaluate(z) * u;
    double rhs_scaled = sp.ocp.f[static_cast<size_t>(i)].evaluate(zs);
    rhs_scaled += sp.ocp.g[static_cast<size_t>(i)][0].evaluate(zs) * u;
    CHECK(rhs_scaled == doctest::Approx(T / 2.0 * rhs_phys).epsilon(1e-12));
  }

  // Running cost picks up the dt = T dtau Jacobian.
  Eigen::VectorXd zsu(4), zu(4);
  zsu << 0.3, 0.25, -0.4, 0.7;
  zu << T * 0.3, 0.5, -0.8, 0.7;
  CHECK(sp.ocp.running_cost.evaluate(zsu) ==
        doctest::Approx(T * np.problem.running_cost.evaluate(zu)).epsilon(1e-12));

  // Scaled state constraints are the unit box.
  for (const auto& h : sp.ocp.X.inequalities) {
    CHECK(h.evaluate(Eigen::Vector2d(0.0, 0.0)) > 0.0);
    CHECK(h.evaluate(Eigen::Vector2d(1.0, 1.0)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(h.max_abs_coeff() == doctest::Approx(1.0));
  }
}
