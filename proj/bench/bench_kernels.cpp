#include <benchmark/benchmark.h>

#include <vector>

#include "airyproc/fredholm.hpp"
#include "airyproc/png_kernel.hpp"
#include "airyproc/png_sim.hpp"

using namespace airyproc;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::kParallel : Execution::kSerial; }

// Three-time operator, 96 nodes per time.
void BM_Discretize(benchmark::State& state) {
  const std::vector<TimeSegment> segs{{0.0, -3.0, 12.0}, {0.2, -3.0, 12.0}, {0.4, -3.0, 12.0}};
  DiscretizationOptions opt;
  opt.nodes = 96;
  opt.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(discretize(segs, opt).block_matrix.data());
}
BENCHMARK(BM_Discretize)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// 2000 light-cone replicas at N = 64, two sites.
void BM_Replicas(benchmark::State& state) {
  const LightConeSimulator sim(0.25, 127, {0, 16});
  for (auto _ : state) benchmark::DoNotOptimize(simulate_replicas(sim, 7, 2000, mode(state)).data());
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_Replicas)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// 64 x 64 finite-N kernel block at N = 128.
void BM_KTildeMatrix(benchmark::State& state) {
  const auto p = PngKernelParams::defaults(0.5, 128);
  std::vector<int> xs;
  for (int x = 230; x < 294; ++x) xs.push_back(x);
  for (auto _ : state) benchmark::DoNotOptimize(k_tilde_matrix(p, 0, xs, 3, xs, mode(state)).data());
}
BENCHMARK(BM_KTildeMatrix)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
