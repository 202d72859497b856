#include <benchmark/benchmark.h>

#include <vector>

#include "microgrid/simulation.hpp"

using namespace microgrid;

namespace {

void BM_NetworkSolve(benchmark::State& state) {
  const auto s = load_scenario("fig5_8");
  const auto net = s.build_network();
  const std::vector<Phasor> emf(net.machine_count(), Phasor(6500.0, 300.0));
  const std::vector<WindCurrent> wind(net.wind_count(), WindCurrent{0.1, 0.1});
  for (auto _ : state) benchmark::DoNotOptimize(net.solve(emf, wind));
}
BENCHMARK(BM_NetworkSolve);

void BM_EquilibriumSolve(benchmark::State& state) {
  const auto problem = load_scenario("fig4_2").equilibrium_problem();
  for (auto _ : state) benchmark::DoNotOptimize(steady_state_droop_solve(problem));
}
BENCHMARK(BM_EquilibriumSolve);

void BM_RunFixture(benchmark::State& state, const char* name) {
  const auto s = load_scenario(name);
  for (auto _ : state) benchmark::DoNotOptimize(run(s));
}
BENCHMARK_CAPTURE(BM_RunFixture, fig3_1, "fig3_1")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunFixture, fig5_12, "fig5_12")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
