#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmac/distribution.hpp"

namespace lmac {

/// Tokens seen so far in a stream, always starting with the EOS token that
/// stands in for "start of text". Grows by one token per coded symbol.
class ModelContext {
 public:
  explicit ModelContext(const Vocabulary& vocab) : tokens_{vocab.eos_id()} {}

  void push(TokenId token) { tokens_.push_back(token); }

  std::span<const TokenId> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  TokenId back() const { return tokens_.back(); }

  /// The trailing `window` tokens (or all of them if fewer).
  std::span<const TokenId> tail(std::size_t window) const {
    std::span<const TokenId> all(tokens_);
    return window >= all.size() ? all : all.subspan(all.size() - window);
  }

 private:
  std::vector<TokenId> tokens_;
};

/// An autoregressive next-token predictor used as the entropy model.
///
/// Implementations must be deterministic: the same context always yields
/// bit-identical frequencies, since encoder and decoder replay the model
/// independently. Adaptive models may keep internal state but only as a
/// cache of what the context already determines; callers feed contexts that
/// grow one token at a time within a stream.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  /// Identity string (the model spec) recorded in containers and reports.
  virtual std::string id() const = 0;

  /// Distribution for the token following `ctx`. The reference stays valid
  /// until the next call on this instance.
  virtual const QuantizedDistribution& next_distribution(const ModelContext& ctx) = 0;

  /// Pre-quantization probability of `token` under the most recent
  /// next_distribution() result. Diagnostics only.
  virtual double raw_probability(TokenId token) const = 0;

  /// A new instance in the initial (nothing observed) state.
  virtual std::unique_ptr<ProbabilityModel> fresh() const = 0;
};

/// Stateless uniform prior over the vocabulary.
class UniformModel final : public ProbabilityModel {
 public:
  explicit UniformModel(const Vocabulary& vocab);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::string id() const override { return "uniform"; }
  const QuantizedDistribution& next_distribution(const ModelContext& ctx) override;
  double raw_probability(TokenId) const override { return 1.0 / vocab_.size(); }
  std::unique_ptr<ProbabilityModel> fresh() const override;

 private:
  Vocabulary vocab_;
  QuantizedDistribution dist_;
};

/// Adaptive order-k model: add-one smoothed counts of each token following
/// its (k-1)-token context, backing off to shorter contexts that have been
/// seen at least once. Order 1 is an adaptive unigram model.
class NgramModel final : public ProbabilityModel {
 public:
  static constexpr unsigned kMaxOrder = 8;

  NgramModel(const Vocabulary& vocab, unsigned order);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::string id() const override { return "ngram:" + std::to_string(order_); }
  const QuantizedDistribution& next_distribution(const ModelContext& ctx) override;
  double raw_probability(TokenId token) const override;
  std::unique_ptr<ProbabilityModel> fresh() const override;

  unsigned order() const { return order_; }

 private:
  struct Key {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.hi * 0x9E3779B97F4A7C15ull ^ k.lo);
    }
  };
  struct Counts {
    std::vector<std::uint32_t> by_token;
    std::uint64_t total = 0;
  };

  Key make_key(std::span<const TokenId> history, std::size_t length) const;
  void observe(std::span<const TokenId> history, TokenId token);
  void sync(const ModelContext& ctx);

  Vocabulary vocab_;
  unsigned order_;
  // tables_[n] maps an n-token context to the counts of what followed it.
  std::vector<std::unordered_map<Key, Counts, KeyHash>> tables_;
  std::size_t consumed_ = 1;   // context length already folded into counts
  TokenId last_seen_ = 0;
  std::vector<std::uint64_t> weights_;
  std::uint64_t weight_sum_ = 0;
  QuantizedDistribution dist_;
};

std::unique_ptr<ProbabilityModel> make_uniform_model(const Vocabulary& vocab);
std::unique_ptr<ProbabilityModel> make_ngram_model(const Vocabulary& vocab, unsigned order);

}  // namespace lmac
