// Serial reference kernels against the tabulated and OpenMP paths.

#include <benchmark/benchmark.h>

#include <vector>

#include "curveflow/drift.hpp"
#include "curveflow/ensemble.hpp"
#include "curveflow/integrator.hpp"
#include "curveflow/sampling.hpp"

using namespace curveflow;

namespace {

std::vector<SpectralField> probes(std::size_t n, std::size_t count) {
  std::vector<SpectralField> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_field(n, 1.0, 1, i));
  return out;
}

void BM_drift_reference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SpectralBasis basis(n);
  const auto u = random_field(n, 1.0, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply_drift(u, n, basis.rule()));
}

void BM_drift_tabulated(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SpectralBasis basis(n);
  const auto u = random_field(n, 1.0, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(apply_drift(u, basis));
}

void BM_drift_batch_serial(benchmark::State& state) {
  const SpectralBasis basis(32);
  const auto fields = probes(32, 256);
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply_drift_batch(fields, basis));
}

void BM_drift_batch_openmp(benchmark::State& state) {
  const SpectralBasis basis(32);
  const auto fields = probes(32, 256);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_drift_batch(fields, basis, workers));
}

SolverConfig ensemble_config() {
  SolverConfig cfg;
  cfg.n = 16;
  cfg.dt = 1e-3;
  cfg.T = 0.1;
  return cfg;
}

void BM_ensemble_serial(benchmark::State& state) {
  const GalerkinIntegrator g(ensemble_config(), AdditiveNoise(1.0, 16));
  const auto x = SpectralField::basis(1, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble::map_members_serial<SpectralField>(
        32, [&](std::size_t m) { return g.simulate(x, m).states.back(); }));
  }
}

void BM_ensemble_openmp(benchmark::State& state) {
  const GalerkinIntegrator g(ensemble_config(), AdditiveNoise(1.0, 16));
  const auto x = SpectralField::basis(1, 16);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble::map_members<SpectralField>(
        32, workers, [&](std::size_t m) { return g.simulate(x, m).states.back(); }));
  }
}

}  // namespace

BENCHMARK(BM_drift_reference)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_drift_tabulated)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_drift_batch_serial);
BENCHMARK(BM_drift_batch_openmp)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_ensemble_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ensemble_openmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
