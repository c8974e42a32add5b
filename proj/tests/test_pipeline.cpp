#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include <nlohmann/json.hpp>

#include "momsyn/pipeline.hpp"

using namespace momsyn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunSettings fast_settings() {
  RunSettings s;
  s.solver.feas_tol = 1e-6;
  s.solver.gap_tol = 1e-6;
  s.simulate.step = 5e-3;
  return s;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run produces report, convergence table and per-order CSVs") {
  TempDir dir("momsyn_run_test");
  const RunReport report = run("di_lqr", {2, 3}, fast_settings(), dir.path.string());

  REQUIRE(report.orders.size() == 2);
  CHECK(report.orders[0].ok());
  CHECK(report.orders[1].ok());
  CHECK(report.oracle_value.has_value());
  CHECK(*report.oracle_value == doctest::Approx(24.9495726).epsilon(1e-5));
  // Lower bounds stay below the Riccati value (plus solver slack).
  CHECK(report.orders[0].lower_bound <= *report.oracle_value + 1e-3);
  CHECK(report.orders[1].lower_bound <= *report.oracle_value + 1e-3);

  CHECK(fs::exists(dir.path / "report.json"));
  CHECK(fs::exists(dir.path / "convergence.csv"));
  CHECK(fs::exists(dir.path / "k2" / "trajectory.csv"));
  CHECK(fs::exists(dir.path / "k2" / "control.csv"));
  CHECK(fs::exists(dir.path / "k3" / "trajectory.csv"));

  const std::string csv = slurp(dir.path / "convergence.csv");
  CHECK(csv.find("k,2k,p_k,status") == 0);

  nlohmann::json j;
  std::ifstream in(dir.path / "report.json");
  in >> j;
  CHECK(j.at("problem") == "di_lqr");
  CHECK(j.at("orders").size() == 2);
  CHECK(j.at("orders")[0].at("two_k") == 4);
}

TEST_CASE("per-order failures are recorded while other orders proceed") {
  TempDir dir("momsyn_run_fail");
  RunSettings s = fast_settings();
  // k = 1 violates the minimum admissible order but k = 2 still runs.
  const RunReport report = run("di_lqr", {1, 2}, s, dir.path.string());
  REQUIRE(report.orders.size() == 2);
  CHECK(!report.orders[0].ok());
  CHECK(report.orders[0].error.find("minimum admissible order") != std::string::npos);
  CHECK(report.orders[1].ok());
}

TEST_CASE("run validates its inputs") {
  TempDir dir("momsyn_run_invalid");
  CHECK_THROWS_AS(run("di_lqr", {}, fast_settings(), dir.path.string()),
                  std::invalid_argument);
  CHECK_THROWS_AS(run("di_lqr", {3, 2}, fast_settings(), dir.path.string()),
                  std::invalid_argument);
  CHECK_THROWS_AS(run("no_such_problem", {2}, fast_settings(), dir.path.string()),
                  std::runtime_error);
}

TEST_CASE("reports are byte-identical apart from the timestamp") {
  TempDir dir1("momsyn_det_a");
  TempDir dir2("momsyn_det_b");
  run("di_lqr", {2}, fast_settings(), dir1.path.string());
  run("di_lqr", {2}, fast_settings(), dir2.path.string());

  const std::regex stamp("\"timestamp\": \"[^\"]*\"");
  const std::string a = std::regex_replace(slurp(dir1.path / "report.json"), stamp, "");
  const std::string b = std::regex_replace(slurp(dir2.path / "report.json"), stamp, "");
  CHECK(a == b);
}

TEST_CASE("parallel order execution matches the serial one") {
  TempDir dir1("momsyn_jobs_a");
  TempDir dir2("momsyn_jobs_b");
  RunSettings serial = fast_settings();
  RunSettings parallel = fast_settings();
  parallel.jobs = 2;
  const RunReport r1 = run("di_lqr", {2, 3}, serial, dir1.path.string());
  const RunReport r2 = run("di_lqr", {2, 3}, parallel, dir2.path.string());
  REQUIRE(r1.orders.size() == r2.orders.size());
  for (size_t i = 0; i < r1.orders.size(); ++i) {
    CHECK(r1.orders[i].lower_bound == r2.orders[i].lower_bound);
    CHECK(r1.orders[i].status == r2.orders[i].status);
  }
}

TEST_CASE("trajectory CSV carries states and controls on a shared grid") {
  TempDir dir("momsyn_csv");
  SimulationResult sim;
  sim.times = Eigen::Vector3d(0.0, 0.5, 1.0);
  sim.states.resize(3, 2);
  sim.states << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  sim.controls.resize(3, 1);
  sim.controls << -1.0, 0.0, 1.0;
  sim.realized_cost = 0.0;
  write_trajectory_csv(sim, (dir.path / "t.csv").string());
  write_control_csv(sim, (dir.path / "c.csv").string());
  const std::string t = slurp(dir.path / "t.csv");
  CHECK(t.find("t,x1,x2,u1") == 0);
  CHECK(t.find("0.5,3,4,0") != std::string::npos);
  const std::string c = slurp(dir.path / "c.csv");
  CHECK(c.find("t,u1") == 0);
}

TEST_CASE("anomaly flags: monotonicity breaks and bound violations") {
  OrderRecord a, b;
  a.k = 3;
  a.lower_bound = 2.0;
  a.realized_cost = 2.5;
  b.k = 4;
  b.lower_bound = 2.1;
  b.realized_cost = 2.2;
  CHECK(derive_flags({a, b}).empty());

  // Bound decreasing with the order.
  b.lower_bound = 1.9;
  auto flags = derive_flags({a, b});
  REQUIRE(flags.size() == 1);
  CHECK(flags[0].find("monotonicity") == 0);

  // Realized cost below its own bound.
  b.lower_bound = 2.1;
  b.realized_cost = 2.0;
  flags = derive_flags({a, b});
  REQUIRE(flags.size() == 1);
  CHECK(flags[0].find("bound violation") == 0);

  // Failed orders stay out of the comparison.
  OrderRecord broken;
  broken.k = 5;
  broken.error = "solver exploded";
  broken.lower_bound = -100.0;
  CHECK(derive_flags({a, broken}).empty());
}

TEST_CASE("default output directory honors the environment variable") {
  setenv("MOMSYN_OUT", "/tmp/momsyn-env-test", 1);
  CHECK(default_out_dir() == "/tmp/momsyn-env-test");
  unsetenv("MOMSYN_OUT");
  CHECK(default_out_dir() == "momsyn-out");
}
