#include <benchmark/benchmark.h>

#include "momsyn/pipeline.hpp"

using namespace momsyn;

static void PolynomialProduct(benchmark::State& state) {
  const int nvars = static_cast<int>(state.range(0));
  const MonomialBasis basis(nvars, 3);
  Polynomial a(nvars), b(nvars);
  for (int i = 0; i < basis.size(); ++i) {
    a.add_term(basis[i], 1.0 / (i + 1));
    b.add_term(basis[i], 1.0 / (i + 2));
  }
  for (auto _ : state) {
    Polynomial c = a * b;
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(PolynomialProduct)->Arg(3)->Arg(5);

static void AssembleDoubleIntegrator(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const NormalizedProblem normalized = normalize_inputs(builtin_problem("di_mintime"));
  for (auto _ : state) {
    RelaxationConfig config;
    config.k = k;
    ConicProblem cp = assemble(normalized, config);
    benchmark::DoNotOptimize(cp);
  }
}
BENCHMARK(AssembleDoubleIntegrator)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void MomentMatrixBuild(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const MonomialBasis basis(4, 2 * k);
  Eigen::VectorXd point(4);
  point << 0.5, 0.2, -0.3, 0.7;
  const MomentVector y = MomentVector::dirac(basis, point);
  for (auto _ : state) {
    Eigen::MatrixXd M = moment_matrix(y, k);
    benchmark::DoNotOptimize(M);
  }
}
BENCHMARK(MomentMatrixBuild)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

static void SolveMinTime(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const NormalizedProblem normalized = normalize_inputs(builtin_problem("di_mintime"));
  RelaxationConfig config;
  config.k = k;
  const ConicProblem cp = assemble(normalized, config);
  for (auto _ : state) {
    ConicSolution sol = solve(cp);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(SolveMinTime)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
