// Serial reference vs OpenMP kernels on the hot paths of the harness:
// brute-force nearest neighbors (ICP, Chamfer), finite-difference Jacobians
// and whole experiment batches.

#include <benchmark/benchmark.h>

#include "rigid_refine/experiment.hpp"
#include "rigid_refine/gradcheck.hpp"
#include "rigid_refine/kernels.hpp"
#include "rigid_refine/reference.hpp"
#include "rigid_refine/rng.hpp"
#include "rigid_refine/synth.hpp"

using namespace rigid_refine;

namespace {

Points cloud(int n, std::uint64_t seed) {
  Rng rng(seed);
  return make_base_cloud(CloudKind::ball, n, rng).matrix();
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) ? Execution::parallel : Execution::serial;
}

void BM_NearestNeighborsReference(benchmark::State& state) {
  const Points q = cloud(static_cast<int>(state.range(0)), 1), r = cloud(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::nearest_neighbors(q, r));
}

void BM_NearestNeighbors(benchmark::State& state) {
  const Points q = cloud(static_cast<int>(state.range(0)), 1), r = cloud(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::nearest_neighbors(q, r, exec_of(state)));
}

void BM_ChamferReference(benchmark::State& state) {
  const Points a = cloud(static_cast<int>(state.range(0)), 3), b = cloud(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(reference::chamfer_distance(a, b));
}

void BM_Chamfer(benchmark::State& state) {
  const Points a = cloud(static_cast<int>(state.range(0)), 3), b = cloud(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::chamfer_distance(a, b, exec_of(state)));
}

void BM_FiniteDifferenceJacobian(benchmark::State& state) {
  const GradcheckCase gc = make_gradcheck_case(5, static_cast<int>(state.range(0)));
  const Rotation rp = gc.r_prev;
  const PoseFunction f = [&rp](const CorrespondenceSet& c) { return pose_vector(refine_step(c, rp)); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(finite_difference_jacobian(f, gc.correspondences, kFiniteDifferenceStep, exec_of(state)));
  }
}

void BM_Experiment(benchmark::State& state) {
  ExperimentConfig config;
  config.trials = 32;
  config.problem.n_points = static_cast<int>(state.range(0));
  config.problem.noise_sigma = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(config, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_NearestNeighborsReference)->Args({1024, 0})->Args({4096, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestNeighbors)->ArgsProduct({{1024, 4096}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChamferReference)->Args({1024, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Chamfer)->ArgsProduct({{1024, 4096}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FiniteDifferenceJacobian)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Experiment)->ArgsProduct({{256, 1024}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
