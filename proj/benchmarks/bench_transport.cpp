#include <benchmark/benchmark.h>

#include "radloc/dataset.hpp"
#include "radloc/transport.hpp"

namespace {

radloc::Scene obstructed_scene() {
  radloc::Scene scene;
  scene.array = radloc::ArrayGeometry::make_ring(8);
  scene.source.pose = {4.0, 25.0};
  radloc::Obstruction slab;
  slab.center = {2.0, 0.4};
  slab.width_m = 0.5;
  slab.height_m = 3.0;
  scene.obstructions = {slab};
  return scene;
}

void ExpectedCounts(benchmark::State& state) {
  const radloc::Scene scene = obstructed_scene();
  for (auto _ : state) {
    auto lambda = radloc::expected_counts(scene);
    benchmark::DoNotOptimize(lambda);
  }
}
BENCHMARK(ExpectedCounts);

void SampleCounts(benchmark::State& state) {
  const radloc::CountVector lambda(8, 5000.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto counts = radloc::sample_counts(lambda, ++seed);
    benchmark::DoNotOptimize(counts);
  }
}
BENCHMARK(SampleCounts);

void McRays(benchmark::State& state) {
  const radloc::Scene scene = obstructed_scene();
  for (auto _ : state) {
    auto counts = radloc::mc_counts(scene, state.range(0), 7);
    benchmark::DoNotOptimize(counts);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(McRays)->Arg(10000)->Arg(100000);

void GenerateDataset(benchmark::State& state) {
  radloc::Preset p = radloc::preset("S1-small");
  p.grid.replicates = 1;
  for (auto _ : state) {
    auto ds = radloc::generate(p.grid, p.scene, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(ds);
  }
}
BENCHMARK(GenerateDataset)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
