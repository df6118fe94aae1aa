#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "lmac/arith_coder.hpp"
#include "lmac/distribution.hpp"
#include "lmac/model.hpp"
#include "lmac/tokenize.hpp"

namespace {

std::string sample_text(std::size_t n) {
  static const char* words[] = {"the ", "of ", "and ", "arithmetic ", "coding ", "interval ",
                                "model ", "a ", "token ", "probability "};
  std::mt19937_64 rng(7);
  std::string s;
  while (s.size() < n) s += words[rng() % 10];
  s.resize(n);
  return s;
}

std::unique_ptr<lmac::ProbabilityModel> model_for(int order) {
  return order == 0 ? lmac::make_uniform_model(lmac::kByteVocabulary)
                    : lmac::make_ngram_model(lmac::kByteVocabulary, static_cast<unsigned>(order));
}

// Arg: model order, 0 meaning the uniform model.
void BM_EncodeStream(benchmark::State& state) {
  const auto tokens = lmac::byte_tokenize(sample_text(64 * 1024));
  for (auto _ : state) {
    auto model = model_for(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(lmac::encode_stream(*model, tokens));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 64 * 1024);
}
BENCHMARK(BM_EncodeStream)->Arg(0)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_DecodeStream(benchmark::State& state) {
  const std::string text = sample_text(64 * 1024);
  auto encoder_model = model_for(static_cast<int>(state.range(0)));
  const auto bits = lmac::encode_stream(*encoder_model, lmac::byte_tokenize(text));
  for (auto _ : state) {
    auto model = model_for(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(lmac::decode_stream(*model, bits, lmac::TokenizerId::kByte));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 64 * 1024);
}
BENCHMARK(BM_DecodeStream)->Arg(0)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

// Raw coder cost per symbol with a fixed distribution of the given size.
void BM_EncodeSymbol(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  std::vector<std::uint64_t> weights(size);
  std::mt19937_64 rng(3);
  for (auto& w : weights) w = 1 + rng() % 1000;
  const auto dist = lmac::quantize_counts(weights);
  std::vector<lmac::TokenId> symbols(4096);
  for (auto& s : symbols) s = static_cast<lmac::TokenId>(rng() % size);
  for (auto _ : state) {
    lmac::ArithmeticEncoder enc;
    for (auto s : symbols) enc.encode(dist, s);
    benchmark::DoNotOptimize(enc.finish());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 4096);
}
BENCHMARK(BM_EncodeSymbol)->Arg(4)->Arg(257)->Arg(32768);

void BM_Quantize(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::vector<double> probs(size);
  double sum = 0;
  for (auto& p : probs) sum += (p = std::uniform_real_distribution<double>(0, 1)(rng));
  for (auto& p : probs) p /= sum;
  for (auto _ : state) benchmark::DoNotOptimize(lmac::quantize(probs));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Quantize)->Arg(257)->Arg(4096)->Arg(32768);

}  // namespace
