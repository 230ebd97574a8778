#include <benchmark/benchmark.h>

#include <cmath>

#include "cnls/evolution.hpp"
#include "cnls/ground_state.hpp"
#include "cnls/stability.hpp"

namespace {

cnls::State sech_triple(const cnls::Grid& grid) {
  const cnls::Field c = std::sqrt(2.0 / 3.0) * cnls::sech_profile(1.0, 3.0, 2.0, grid);
  return cnls::State(c, c, c);
}

void BM_SpectralDerivative(benchmark::State& st) {
  const cnls::Grid grid(static_cast<std::size_t>(st.range(0)), 40.0);
  const cnls::Field f = cnls::sech_profile(1.0, 1.0, 2.0, grid);
  for (auto _ : st) benchmark::DoNotOptimize(cnls::spectral_derivative(f));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_SpectralDerivative)->RangeMultiplier(2)->Range(256, 8192)->Complexity(benchmark::oNLogN);

void BM_Rearrange(benchmark::State& st) {
  const cnls::Grid grid(static_cast<std::size_t>(st.range(0)), 40.0);
  const cnls::RealField f = cnls::modulus(cnls::translate(cnls::sech_profile(1.0, 1.0, 2.0, grid), 3.3));
  for (auto _ : st) benchmark::DoNotOptimize(cnls::rearrange(f));
}
BENCHMARK(BM_Rearrange)->Arg(1024)->Arg(8192);

void BM_EnergyGradient(benchmark::State& st) {
  const cnls::Grid grid(1024, 40.0);
  const cnls::State s = sech_triple(grid);
  const auto model = cnls::CouplingModel::uniform(1.0, st.range(0) == 0 ? 2.0 : 2.5);
  for (auto _ : st) benchmark::DoNotOptimize(cnls::energy_gradient(s, model));
}
BENCHMARK(BM_EnergyGradient)->Arg(0)->Arg(1);

void BM_StrangStep(benchmark::State& st) {
  const cnls::Grid grid(1024, 40.0);
  const auto model = cnls::CouplingModel::uniform(1.0, 2.0);
  cnls::State s = sech_triple(grid);
  for (auto _ : st) s = cnls::step(s, 1e-3, model);
}
BENCHMARK(BM_StrangStep);

void BM_EvolveThousandSteps(benchmark::State& st) {
  const cnls::Grid grid(1024, 40.0);
  const auto model = cnls::CouplingModel::uniform(1.0, 2.0);
  const cnls::State s = sech_triple(grid);
  cnls::EvolveOptions opts;
  opts.record_every = 100;
  for (auto _ : st) benchmark::DoNotOptimize(cnls::evolve(s, 1.0, 1e-3, model, opts));
}
BENCHMARK(BM_EvolveThousandSteps)->Unit(benchmark::kMillisecond);

void BM_OrbitalDistance(benchmark::State& st) {
  const cnls::Grid grid(1024, 40.0);
  const cnls::State profile = sech_triple(grid);
  const cnls::State s = cnls::perturb(profile, cnls::PerturbationKind::random_h1, 1e-3, 7);
  for (auto _ : st) benchmark::DoNotOptimize(cnls::orbital_fit(s, profile));
}
BENCHMARK(BM_OrbitalDistance);

void BM_SolveEqualCoupling(benchmark::State& st) {
  const cnls::Grid grid(1024, 40.0);
  const auto model = cnls::CouplingModel::uniform(1.0, 2.0);
  const cnls::MassTriple m(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);
  for (auto _ : st) benchmark::DoNotOptimize(cnls::solve_ground_state(model, m, grid));
}
BENCHMARK(BM_SolveEqualCoupling)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
