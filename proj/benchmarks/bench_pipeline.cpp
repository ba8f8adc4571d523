#include <benchmark/benchmark.h>

#include "cuescreen/baseline.hpp"
#include "cuescreen/chat_parser.hpp"
#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/evaluator.hpp"
#include "cuescreen/random.hpp"
#include "cuescreen/synth.hpp"

using namespace cuescreen;

namespace {

synth::SynthCorpus corpus_of(std::size_t mean_tokens) {
  synth::SynthConfig cfg;
  cfg.n_per_class = 16;
  cfg.mean_tokens = mean_tokens;
  cfg.seed = 99;
  return synth::generate(cfg);
}

void BM_ParseAndClean(benchmark::State& state) {
  const auto corpus = corpus_of(static_cast<std::size_t>(state.range(0)));
  std::size_t bytes = 0;
  for (const auto& f : corpus.files) bytes += f.content.size();
  for (auto _ : state) {
    for (const auto& f : corpus.files) {
      benchmark::DoNotOptimize(chat::extract_participant_text(chat::parse_document(f.content, f.name)));
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_ParseAndClean)->Arg(60)->Arg(240)->Arg(960);

void BM_CueCoverage(benchmark::State& state) {
  Rng rng(3);
  const auto& vocab = synth::filler_vocabulary();
  std::vector<std::string> tokens;
  for (std::int64_t i = 0; i < state.range(0); ++i) tokens.push_back(vocab[rng.below(vocab.size())]);
  for (auto _ : state) benchmark::DoNotOptimize(cues::cue_coverage(tokens));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CueCoverage)->Arg(100)->Arg(1000)->Arg(10000);

void BM_FitLda(benchmark::State& state) {
  Rng rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  baseline::Matrix x;
  std::vector<Label> y;
  for (std::size_t i = 0; i < n; ++i) {
    const bool ad = i % 2 == 0;
    std::vector<double> row(14);
    for (auto& v : row) v = rng.normal() + (ad ? 1.0 : 0.0);
    x.push_back(std::move(row));
    y.push_back(ad ? Label::AD : Label::NonAD);
  }
  for (auto _ : state) benchmark::DoNotOptimize(baseline::fit_lda(x, y));
}
BENCHMARK(BM_FitLda)->Arg(108)->Arg(1000)->Arg(10000);

void BM_Metrics(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(eval::metrics({22, 6, 2, 18}));
}
BENCHMARK(BM_Metrics);

}  // namespace

BENCHMARK_MAIN();
