#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lmac {

using TokenId = std::uint32_t;

/// A finite token alphabet with a designated end-of-sequence token.
class Vocabulary {
 public:
  Vocabulary(std::uint32_t size, TokenId eos_id);

  std::uint32_t size() const { return size_; }
  TokenId eos_id() const { return eos_id_; }
  bool contains(TokenId id) const { return id < size_; }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::uint32_t size_;
  TokenId eos_id_;
};

inline constexpr unsigned kFrequencyBits = 16;
inline constexpr std::uint32_t kFrequencyTotal = 1u << kFrequencyBits;
/// Largest vocabulary the quantizer accepts; leaves at least one spare
/// count per symbol after the floor-of-one rule.
inline constexpr std::uint32_t kMaxQuantizedVocabulary = 1u << 15;

/// Integer next-token distribution: every symbol has at least one count and
/// the counts sum to `total`. Cumulative counts are precomputed so lookups
/// in either direction are cheap.
class QuantizedDistribution {
 public:
  QuantizedDistribution() = default;
  /// Throws kInvalidArgument unless the invariants hold. `total` may be any
  /// value in [size, 2^16]; the coder itself uses kFrequencyTotal.
  explicit QuantizedDistribution(std::vector<std::uint32_t> freqs,
                                 std::uint32_t total = kFrequencyTotal);

  std::uint32_t size() const { return static_cast<std::uint32_t>(freqs_.size()); }
  std::uint32_t total() const { return total_; }
  std::span<const std::uint32_t> freqs() const { return freqs_; }

  std::uint32_t freq(TokenId t) const { return freqs_[t]; }
  /// Sum of the counts of all symbols below `t`.
  std::uint32_t cumulative(TokenId t) const { return cumulative_[t]; }
  /// The symbol whose cumulative range [F(t), F(t)+freq(t)) holds `target`.
  TokenId find(std::uint32_t target) const;

  double probability(TokenId t) const {
    return static_cast<double>(freqs_[t]) / total_;
  }

  friend bool operator==(const QuantizedDistribution& a, const QuantizedDistribution& b) {
    return a.total_ == b.total_ && a.freqs_ == b.freqs_;
  }

 private:
  std::vector<std::uint32_t> freqs_;
  std::vector<std::uint32_t> cumulative_;
  std::uint32_t total_ = 0;
};

/// Largest-remainder apportionment of `probs` onto `total` counts.
///
/// 1. Each probability is scaled by total / sum(probs) and floored.
/// 2. The leftover counts go one each to the largest fractional remainders,
///    ties to the lower token id.
/// 3. Every symbol left at zero is raised to one; each such unit is taken
///    from the symbol with the largest count (ties: smaller probability,
///    then lower token id).
///
/// Throws kVocabularyTooLarge if probs.size() > 2^15, kInvalidArgument on
/// negative or non-finite entries, a sum more than 1e-6 away from 1, or
/// total < probs.size().
QuantizedDistribution quantize(std::span<const double> probs,
                               std::uint32_t total = kFrequencyTotal);

/// Same apportionment for probabilities given as weights / sum(weights),
/// carried out in exact integer arithmetic. Used by the count-based models.
QuantizedDistribution quantize_counts(std::span<const std::uint64_t> weights,
                                      std::uint32_t total = kFrequencyTotal);

}  // namespace lmac
