#include <benchmark/benchmark.h>

#include <memory>

#include "qpnls/grid.hpp"
#include "qpnls/linear_propagator.hpp"
#include "qpnls/nonlinear_integrator.hpp"
#include "qpnls/dispersive_weights.hpp"
#include "qpnls/trajectories.hpp"

namespace {

using namespace qpnls;

PotentialSpec trap2d() {
  PotentialSpec spec;
  spec.omega = {1.0, 0.8};
  spec.delta = {1, 1};
  spec.b = {0.0, 0.0};
  return spec;
}

PotentialSpec saddle2d() {
  PotentialSpec spec;
  spec.omega = {1.0, 0.8};
  spec.delta = {-1, 1};
  spec.b = {0.0, 0.0};
  return spec;
}

WaveFunction gaussian1d(int n) {
  auto grid = std::make_shared<Grid>(std::vector<int>{n},
                                     std::vector<double>{14.0});
  return make_gaussian(grid, 1.0, {0.3}, {0.9}, {0.5});
}

WaveFunction gaussian2d(int n) {
  auto grid = std::make_shared<Grid>(std::vector<int>{n, n},
                                     std::vector<double>{14.0, 14.0});
  return make_gaussian(grid, 1.0, {0.3, -0.2}, {0.9, 1.1}, {0.5, 0.0});
}

void BM_mehler_1d(benchmark::State& state) {
  PotentialSpec spec;
  spec.omega = {1.0};
  spec.delta = {1};
  spec.b = {0.0};
  const WaveFunction psi = gaussian1d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mehler_apply(psi, spec, 0.6));
  }
}
BENCHMARK(BM_mehler_1d)->Arg(1 << 12)->Arg(1 << 16);

void BM_mehler_2d_trap(benchmark::State& state) {
  const PotentialSpec spec = trap2d();
  const WaveFunction psi = gaussian2d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mehler_apply(psi, spec, 0.6));
  }
}
BENCHMARK(BM_mehler_2d_trap)->Arg(256)->Arg(512);

void BM_mehler_2d_saddle(benchmark::State& state) {
  const PotentialSpec spec = saddle2d();
  const WaveFunction psi = gaussian2d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mehler_apply(psi, spec, 0.4));
  }
}
BENCHMARK(BM_mehler_2d_saddle)->Arg(256)->Arg(512);

void BM_strang_2d(benchmark::State& state) {
  const PotentialSpec spec = trap2d();
  const WaveFunction psi = gaussian2d(static_cast<int>(state.range(0)));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.lambda = -1.0;
  cfg.sigma = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(strang_step(psi, spec, cfg, 0.0));
  }
}
BENCHMARK(BM_strang_2d)->Arg(256)->Arg(512);

void BM_grad_norm(benchmark::State& state) {
  const WaveFunction psi = gaussian2d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_norm(psi));
  }
}
BENCHMARK(BM_grad_norm)->Arg(256)->Arg(512);

void BM_resample(benchmark::State& state) {
  PotentialSpec spec;
  spec.omega = {1.0};
  spec.delta = {-1};
  spec.b = {0.0};
  const WaveFunction psi = gaussian1d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mehler_sample(psi, spec, 2.0, {256}, {60.0}));
  }
}
BENCHMARK(BM_resample)->Arg(1 << 12)->Arg(1 << 14);

void BM_weight_profile(benchmark::State& state) {
  const PotentialSpec spec = saddle2d();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        make_weight_profile(spec, 0.01, 10.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_weight_profile)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
