#include "tflab/numerics.hpp"
#include "tflab/weights.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_eig(benchmark::State& state) {
  const auto d = state.range(0);
  const tflab::Matrix f = tflab::assemble_layer_matrix(tflab::synthesize_random(d, 4, 1, 1, 1.0).layers[0]).f;
  for (auto _ : state) benchmark::DoNotOptimize(tflab::eig(f));
}
BENCHMARK(BM_eig)->Arg(32)->Arg(128)->Arg(768);

void BM_assemble(benchmark::State& state) {
  const auto layer = tflab::synthesize_random(state.range(0), 12, 1, 1, 1.0).layers[0];
  for (auto _ : state) benchmark::DoNotOptimize(tflab::assemble_layer_matrix(layer));
}
BENCHMARK(BM_assemble)->Arg(96)->Arg(768);

}  // namespace
