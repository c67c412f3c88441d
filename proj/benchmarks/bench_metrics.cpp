#include "tflab/metrics.hpp"
#include "tflab/weights.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_layer_sweep(benchmark::State& state) {
  const auto model = tflab::synthesize_random(32, 4, 12, 1, 1.0);
  tflab::SweepConfig cfg;
  cfg.ensemble_size = state.range(0);
  cfg.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(tflab::layer_sweep(model, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.ensemble_size);
}
BENCHMARK(BM_layer_sweep)->Args({1000, 1})->Args({1000, 4})->Unit(benchmark::kMillisecond);

}  // namespace
