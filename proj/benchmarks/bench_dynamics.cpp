#include "tflab/dynamics.hpp"
#include "tflab/weights.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_step_multihead(benchmark::State& state) {
  const auto d = state.range(0), n = state.range(1);
  const auto layer = tflab::synthesize_random(d, 4, 1, 2, 1.0).layers[0];
  const tflab::Matrix x = tflab::random_tokens(d, n, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tflab::step_multihead(x, layer, 1.0, tflab::Mask::Full, true));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_step_multihead)->Args({32, 64})->Args({128, 64})->Args({128, 256});

void BM_step_oja(benchmark::State& state) {
  const auto d = state.range(0);
  const tflab::Matrix f = tflab::assemble_layer_matrix(tflab::synthesize_random(d, 1, 1, 4, 1.0).layers[0]).f;
  const tflab::Matrix x = tflab::random_tokens(d, 64, 5);
  for (auto _ : state) benchmark::DoNotOptimize(tflab::step_oja(x, f, 0.1));
}
BENCHMARK(BM_step_oja)->Arg(32)->Arg(128);

}  // namespace
