#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "lmac/corpus.hpp"
#include "lmac/estimator.hpp"
#include "lmac/model.hpp"

namespace {

std::string corpus_text(std::size_t words) {
  std::mt19937_64 rng(11);
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    const std::size_t len = 2 + rng() % 8;
    for (std::size_t k = 0; k < len; ++k) s.push_back(static_cast<char>('a' + rng() % 26));
    s.push_back(' ');
  }
  return s;
}

void BM_ChunkText(benchmark::State& state) {
  const std::string text = corpus_text(200 * 1000);
  for (auto _ : state) benchmark::DoNotOptimize(lmac::chunk_text(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ChunkText)->Unit(benchmark::kMillisecond);

// Whole evaluation over 50 chunks; arg 0 is coded, 1 is estimated.
void BM_EvaluateModel(benchmark::State& state) {
  const lmac::ChunkSet chunks = lmac::chunk_text(corpus_text(200 * 50));
  const auto model = lmac::make_ngram_model(lmac::kByteVocabulary, 3);
  lmac::ByteTokenizer tokenizer;
  const auto mode = state.range(0) == 0 ? lmac::EvalMode::kCoded : lmac::EvalMode::kEstimated;
  for (auto _ : state) benchmark::DoNotOptimize(lmac::evaluate_model(*model, chunks, mode, tokenizer));
}
BENCHMARK(BM_EvaluateModel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
