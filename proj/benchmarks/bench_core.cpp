#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "qlm/qlm.hpp"
#include "support/fixtures.hpp"

using namespace qlm;

namespace {

void BM_CholeskyToDensity(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto p = testing::random_packed(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cholesky_to_density(p, d));
}
BENCHMARK(BM_CholeskyToDensity)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_VonNeumannEntropy(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto rho = testing::random_density(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(von_neumann_entropy(rho));
}
BENCHMARK(BM_VonNeumannEntropy)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_PairGradients(benchmark::State& state) {
  const std::size_t d = 8;
  const auto window = static_cast<std::size_t>(state.range(0));
  const std::size_t words = 2 * window + 6;
  Vocabulary vocab;
  for (std::size_t i = 0; i < words; ++i) vocab.add("w" + std::to_string(i), 1);
  Rng rng(3);
  std::vector<double> params;
  for (std::size_t i = 0; i < words; ++i) {
    const auto p = testing::random_packed(d, rng);
    params.insert(params.end(), p.begin(), p.end());
  }
  const EmbeddingStore store(std::move(vocab), d, std::move(params));
  std::vector<WordId> ctx, neg;
  for (std::size_t i = 1; i <= 2 * window; ++i) ctx.push_back(static_cast<WordId>(i));
  for (std::size_t i = 0; i < 5; ++i) neg.push_back(static_cast<WordId>(2 * window + 1 + i));
  for (auto _ : state) benchmark::DoNotOptimize(pair_gradients(store, 0, ctx, neg));
}
BENCHMARK(BM_PairGradients)->Arg(2)->Arg(5);

void BM_SwapTestExact(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const auto rho = testing::random_density(d, rng);
  const auto sigma = testing::random_density(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(circuit::swap_test_exact(rho, sigma));
}
BENCHMARK(BM_SwapTestExact)->Arg(2)->Arg(4)->Arg(8);

}  // namespace
BENCHMARK_MAIN();
