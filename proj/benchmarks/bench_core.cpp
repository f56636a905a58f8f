// Microbenchmarks for the pieces that dominate chain runtime: draft
// generation, spectral transforms, lag-table construction and the guided
// step loop.

#include <memory>

#include <benchmark/benchmark.h>

#include "spdebridge/guided_solver.hpp"
#include "spdebridge/samplers.hpp"

using namespace spdebridge;

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

SpectralModel production_model() {
  return SpectralModel(make_dirichlet_laplacian(3e-3, 100), make_white_noise(1.0, 100),
                       kPi);
}

void bench_draft_generation(benchmark::State& state) {
  const Eigen::Index j_count = state.range(0);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(NoiseDraft::standard(j_count, 200, 1, ++stream));
  }
  state.SetItemsProcessed(state.iterations() * j_count * 200);
}
BENCHMARK(bench_draft_generation)->Arg(32)->Arg(100);

void bench_pcn_mix(benchmark::State& state) {
  const NoiseDraft z = NoiseDraft::standard(100, 200, 1, 1);
  const NoiseDraft w = NoiseDraft::standard(100, 200, 1, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcn_mix(z, w, 0.08));
  }
  state.SetItemsProcessed(state.iterations() * z.increments.size());
}
BENCHMARK(bench_pcn_mix);

void bench_transform_pair(benchmark::State& state) {
  const Eigen::Index j_count = state.range(0);
  const PhysicalGrid grid(j_count, kPi, 4 * j_count);
  const Eigen::VectorXd coeffs = RngStream(1, 1).normal_vector(j_count);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid.to_spectral(grid.to_physical(coeffs)));
  }
}
BENCHMARK(bench_transform_pair)->Arg(32)->Arg(100);

void bench_nonlinearity_eval(benchmark::State& state) {
  const Eigen::Index j_count = 100;
  const Nonlinearity drift = Nonlinearity::michaelis_menten(
      3.0, 0.1, std::make_shared<const PhysicalGrid>(j_count, kPi, 4 * j_count));
  const Eigen::VectorXd x = RngStream(1, 2).normal_vector(j_count);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift.eval_spectral(0.0, x));
  }
}
BENCHMARK(bench_nonlinearity_eval);

void bench_lag_table(benchmark::State& state) {
  const SpectralModel model = production_model();
  const TimeGrid grid(1.0, 200);
  const Observation obs = Observation::projection(10, 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(LagTable(obs, model, grid));
  }
}
BENCHMARK(bench_lag_table);

void bench_guided_solve(benchmark::State& state) {
  const SpectralModel model = production_model();
  const TimeGrid grid(1.0, 200);
  const Observation obs = Observation::projection(10, 100);
  const Nonlinearity drift = Nonlinearity::michaelis_menten(
      3.0, 0.1, std::make_shared<const PhysicalGrid>(100, kPi, 400));
  const LagTable lags(obs, model, grid);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(100);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 0.3);
  const NoiseDraft noise = NoiseDraft::standard(100, 200, 1, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_guided(model, drift, lags, y, x0, grid, noise));
  }
  state.SetItemsProcessed(state.iterations() * grid.num_steps());
}
BENCHMARK(bench_guided_solve);

void bench_forward_endpoints_batch(benchmark::State& state) {
  const SpectralModel model = production_model();
  const TimeGrid grid(1.0, 200);
  const Nonlinearity drift = Nonlinearity::michaelis_menten(
      3.0, 0.1, std::make_shared<const PhysicalGrid>(100, kPi, 400));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_forward_endpoints(model, drift, x0, grid, 1, 0, 0, 256));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(bench_forward_endpoints_batch);

}  // namespace

BENCHMARK_MAIN();
