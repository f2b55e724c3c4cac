// Serial reference vs OpenMP corpus_report on a synthetic question corpus.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "pman/ngram_metrics.hpp"

namespace {

std::vector<pman::TokenSeq> make_corpus(std::size_t n, std::uint64_t seed) {
  static const char* vocab[] = {"what", "which", "who", "school", "of", "music", "was", "the",
                                "composer", "german", "romantic", "associated", "with", "opera",
                                "born", "in", "city", "running", "runs", "?"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(8, 30), word(0, 19);
  std::vector<pman::TokenSeq> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (int k = len(rng); k > 0; --k) {
      s += vocab[word(rng)];
      s += ' ';
    }
    out.push_back(pman::tokenize(s));
  }
  return out;
}

void run(benchmark::State& state, pman::Execution exec) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto hyps = make_corpus(n, 1), refs = make_corpus(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pman::corpus_report(hyps, refs, exec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_CorpusReportSerial(benchmark::State& state) { run(state, pman::Execution::Serial); }
void BM_CorpusReportParallel(benchmark::State& state) { run(state, pman::Execution::Parallel); }

BENCHMARK(BM_CorpusReportSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CorpusReportParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
