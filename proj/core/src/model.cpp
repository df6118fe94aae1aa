#include "lmac/model.hpp"

#include <algorithm>

#include "lmac/error.hpp"

namespace lmac {

UniformModel::UniformModel(const Vocabulary& vocab) : vocab_(vocab) {
  std::vector<std::uint64_t> ones(vocab.size(), 1);
  dist_ = quantize_counts(ones);
}

const QuantizedDistribution& UniformModel::next_distribution(const ModelContext& ctx) {
  // Contexts grow one token at a time, so checking the newest suffices.
  if (!vocab_.contains(ctx.back())) {
    throw Error(ErrorCode::kInvalidArgument, "context token out of vocabulary");
  }
  return dist_;
}

std::unique_ptr<ProbabilityModel> UniformModel::fresh() const {
  return std::make_unique<UniformModel>(*this);
}

NgramModel::NgramModel(const Vocabulary& vocab, unsigned order)
    : vocab_(vocab), order_(order), tables_(order), last_seen_(vocab.eos_id()) {
  if (order < 1 || order > kMaxOrder) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram order must be in [1, 8]");
  }
  if (vocab.size() > kMaxQuantizedVocabulary) {
    throw Error(ErrorCode::kVocabularyTooLarge, "n-gram vocabulary exceeds 2^15 symbols");
  }
  weights_.assign(vocab.size(), 1);
  weight_sum_ = vocab.size();
}

NgramModel::Key NgramModel::make_key(std::span<const TokenId> history, std::size_t length) const {
  // At most 7 tokens of at most 16 bits each.
  unsigned __int128 packed = 0;
  for (std::size_t i = history.size() - length; i < history.size(); ++i) {
    packed = (packed << 16) | history[i];
  }
  return Key{static_cast<std::uint64_t>(packed >> 64), static_cast<std::uint64_t>(packed)};
}

void NgramModel::observe(std::span<const TokenId> history, TokenId token) {
  const std::size_t longest = std::min<std::size_t>(order_ - 1, history.size());
  for (std::size_t n = 0; n <= longest; ++n) {
    Counts& c = tables_[n][make_key(history, n)];
    if (c.by_token.empty()) c.by_token.assign(vocab_.size(), 0);
    ++c.by_token[token];
    ++c.total;
  }
}

void NgramModel::sync(const ModelContext& ctx) {
  const auto tokens = ctx.tokens();
  // A context that does not extend the one already folded in restarts the
  // model from scratch.
  if (tokens.size() < consumed_ || tokens[consumed_ - 1] != last_seen_) {
    for (auto& table : tables_) table.clear();
    consumed_ = 1;
    if (!vocab_.contains(tokens[0])) {
      throw Error(ErrorCode::kInvalidArgument, "context token out of vocabulary");
    }
  }
  for (; consumed_ < tokens.size(); ++consumed_) {
    if (!vocab_.contains(tokens[consumed_])) {
      throw Error(ErrorCode::kInvalidArgument, "context token out of vocabulary");
    }
    observe(tokens.first(consumed_), tokens[consumed_]);
  }
  last_seen_ = tokens.back();
}

const QuantizedDistribution& NgramModel::next_distribution(const ModelContext& ctx) {
  sync(ctx);
  const auto history = ctx.tokens();
  const Counts* found = nullptr;
  for (std::size_t n = std::min<std::size_t>(order_ - 1, history.size()) + 1; n-- > 0;) {
    auto it = tables_[n].find(make_key(history, n));
    if (it != tables_[n].end() && it->second.total > 0) {
      found = &it->second;
      break;
    }
  }
  if (found == nullptr) {
    std::fill(weights_.begin(), weights_.end(), 1);
    weight_sum_ = vocab_.size();
  } else {
    for (std::size_t t = 0; t < weights_.size(); ++t) weights_[t] = found->by_token[t] + 1ull;
    weight_sum_ = found->total + vocab_.size();
  }
  dist_ = quantize_counts(weights_);
  return dist_;
}

double NgramModel::raw_probability(TokenId token) const {
  return static_cast<double>(weights_[token]) / static_cast<double>(weight_sum_);
}

std::unique_ptr<ProbabilityModel> NgramModel::fresh() const {
  return std::make_unique<NgramModel>(vocab_, order_);
}

std::unique_ptr<ProbabilityModel> make_uniform_model(const Vocabulary& vocab) {
  return std::make_unique<UniformModel>(vocab);
}

std::unique_ptr<ProbabilityModel> make_ngram_model(const Vocabulary& vocab, unsigned order) {
  return std::make_unique<NgramModel>(vocab, order);
}

}  // namespace lmac
