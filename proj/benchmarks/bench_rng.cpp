#include <benchmark/benchmark.h>

#include "weakeq/philox.hpp"

static void BM_PhiloxBlock(benchmark::State& state) {
  const auto key = weakeq::Philox4x32::key_from_seed(42);
  weakeq::Philox4x32::Counter ctr{0, 0, 0, 0};
  for (auto _ : state) {
    ++ctr[0];
    benchmark::DoNotOptimize(weakeq::Philox4x32::apply(ctr, key));
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_PhiloxBlock);

static void BM_PathNormal(benchmark::State& state) {
  const weakeq::PathRng rng(42, 7, 0);
  std::uint32_t block = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal(block++, 0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PathNormal);
