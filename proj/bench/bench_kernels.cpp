#include <benchmark/benchmark.h>

#include "cj/kernels.hpp"
#include "cj/random.hpp"

namespace {

cj::PreferenceMatrix Matrix(std::size_t n) {
  cj::PreferenceMatrix m(n);
  cj::Rng rng(1);
  for (std::size_t t = 0; t < 20 * n; ++t) {
    const cj::ItemId i = cj::UniformIndex(rng, n);
    const cj::ItemId j = (i + 1 + cj::UniformIndex(rng, n - 1)) % n;
    m.Record(i, j);
  }
  return m;
}

template <auto Kernel>
void BM_WinProbabilities(benchmark::State& state) {
  const auto m = Matrix(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(m));
}

template <auto Kernel>
void BM_EntropyGrid(benchmark::State& state) {
  const auto m = Matrix(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(m));
}

template <auto Kernel>
void BM_ExactRanks(benchmark::State& state) {
  const auto p = cj::kernels::WinProbabilitiesSerial(Matrix(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p));
}

template <auto Kernel>
void BM_MonteCarlo(benchmark::State& state) {
  const auto p = cj::kernels::WinProbabilitiesSerial(Matrix(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p, 0, 10000, 7));
}

}  // namespace

BENCHMARK(BM_WinProbabilities<cj::kernels::WinProbabilitiesSerial>)->Arg(25)->Arg(100);
BENCHMARK(BM_WinProbabilities<cj::kernels::WinProbabilitiesParallel>)->Arg(25)->Arg(100);
BENCHMARK(BM_EntropyGrid<cj::kernels::EntropyGridSerial>)->Arg(25)->Arg(100);
BENCHMARK(BM_EntropyGrid<cj::kernels::EntropyGridParallel>)->Arg(25)->Arg(100);
BENCHMARK(BM_ExactRanks<cj::kernels::AllExactRankProbabilitiesSerial>)->Arg(12)->Arg(25)->Arg(100);
BENCHMARK(BM_ExactRanks<cj::kernels::AllExactRankProbabilitiesParallel>)->Arg(12)->Arg(25)->Arg(100);
BENCHMARK(BM_MonteCarlo<cj::kernels::MonteCarloRanksSerial>)->Arg(25)->Arg(100);
BENCHMARK(BM_MonteCarlo<cj::kernels::MonteCarloRanksParallel>)->Arg(25)->Arg(100);

BENCHMARK_MAIN();
