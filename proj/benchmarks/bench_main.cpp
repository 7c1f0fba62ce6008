#include <benchmark/benchmark.h>

#include <cmath>

#include <bipen/generators.hpp>
#include <bipen/penalty.hpp>
#include <bipen/saddle.hpp>

using namespace bipen;

namespace {

// (x - 0.3)^2/2 + xy - (y + 0.2)^2/2 over [-1,1]^2
ScscMinimax quadratic_saddle() {
  ScscMinimax s;
  s.nx = 1;
  s.ny = 1;
  s.hbar = SmoothOracle(
      2,
      [](const Vec& u) { return 0.5 * (u(0) - 0.3) * (u(0) - 0.3) + u(0) * u(1) - 0.5 * (u(1) + 0.2) * (u(1) + 0.2); },
      [](const Vec& u, Vec& g) { g << u(0) - 0.3 + u(1), u(0) - u(1) - 0.2; }, std::sqrt(2.0));
  s.p = ProxTerm::indicator(Box::uniform(1, -1, 1));
  s.q = ProxTerm::indicator(Box::uniform(1, -1, 1));
  s.sigma_x = 1.0;
  s.sigma_y = 1.0;
  s.L_hbar = std::sqrt(2.0);
  return s;
}

void BM_solve_scsc(benchmark::State& state) {
  const ScscMinimax prob = quadratic_saddle();
  const double tau = std::pow(10.0, -static_cast<double>(state.range(0)));
  Vec x0 = Vec::Zero(1), y0 = Vec::Zero(1);
  for (auto _ : state) {
    ScscResult r = solve_scsc(prob, x0, y0, tau);
    benchmark::DoNotOptimize(r.x);
  }
}
BENCHMARK(BM_solve_scsc)->Arg(4)->Arg(6)->Arg(8);

void BM_unc_penalty_gradient(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const MinimaxProblem m = assemble_unc_penalty(to_problem(gen_unc_instance(n, n, 1)), 100.0);
  const Vec u = Vec::Constant(3 * n, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(m.h.gradient(u));
  state.SetComplexityN(n);
}
BENCHMARK(BM_unc_penalty_gradient)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_con_penalty_gradient(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const MinimaxProblem m = assemble_con_penalty(to_problem(gen_con_instance(n, n, 5, 1)), 100.0, 1e4);
  const Vec u = Vec::Constant(3 * n, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(m.h.gradient(u));
  state.SetComplexityN(n);
}
BENCHMARK(BM_con_penalty_gradient)->RangeMultiplier(2)->Range(16, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
