#include <benchmark/benchmark.h>

#include <random>

#include "gssl/corpus.hpp"
#include "gssl/crf.hpp"
#include "gssl/graph.hpp"
#include "gssl/propagation.hpp"
#include "gssl/random.hpp"

namespace {

gssl::Matrix random_scores(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  gssl::Matrix m(rows, cols);
  for (double& x : m.data()) x = 2.0 * gssl::uniform_real(rng) - 1.0;
  return m;
}

void BM_ForwardBackward(benchmark::State& state) {
  auto rng = gssl::make_rng(1);
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto L = static_cast<std::size_t>(state.range(1));
  const auto node = random_scores(rng, T, L);
  const auto trans = random_scores(rng, L, L);
  for (auto _ : state) benchmark::DoNotOptimize(gssl::forward_backward(node, trans));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_ForwardBackward)->Args({12, 10})->Args({12, 30})->Args({40, 30});

void BM_Viterbi(benchmark::State& state) {
  auto rng = gssl::make_rng(2);
  const auto node = random_scores(rng, 12, static_cast<std::size_t>(state.range(0)));
  const auto trans = random_scores(rng, node.cols(), node.cols());
  for (auto _ : state) benchmark::DoNotOptimize(gssl::viterbi(node, trans));
}
BENCHMARK(BM_Viterbi)->Arg(10)->Arg(30);

void BM_BuildGraph(benchmark::State& state) {
  const auto syn = gssl::generate_synthetic(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gssl::build_graph(syn.sentences, syn.lexicon, gssl::kDefaultNeighbors));
}
BENCHMARK(BM_BuildGraph)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Propagate(benchmark::State& state) {
  const auto syn = gssl::generate_synthetic(1, static_cast<std::size_t>(state.range(0)));
  const auto graph = gssl::build_graph(syn.sentences, syn.lexicon, gssl::kDefaultNeighbors);
  const std::size_t labels = syn.alphabet.size();
  auto rng = gssl::make_rng(3);
  std::vector<gssl::NodeDistributions> base(graph.size());
  for (auto& d : base) {
    d.prior = gssl::uniform_distribution(labels);
    gssl::Distribution seed(labels);
    double sum = 0.0;
    for (double& x : seed) sum += (x = gssl::uniform_real(rng));
    for (double& x : seed) x /= sum;
    d.seed = seed;
    d.current = seed;
  }
  const gssl::MadConfig config{1.0, 0.01, 0.01, 30, 1e-300};  // always run all 30 sweeps
  for (auto _ : state) {
    auto d = base;
    benchmark::DoNotOptimize(gssl::propagate(graph, d, config));
  }
}
BENCHMARK(BM_Propagate)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
