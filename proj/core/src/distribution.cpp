#include "lmac/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include "lmac/error.hpp"

namespace lmac {

Vocabulary::Vocabulary(std::uint32_t size, TokenId eos_id) : size_(size), eos_id_(eos_id) {
  if (size < 2) throw Error(ErrorCode::kInvalidArgument, "vocabulary needs at least two symbols");
  if (eos_id >= size) throw Error(ErrorCode::kInvalidArgument, "eos id outside vocabulary");
}

QuantizedDistribution::QuantizedDistribution(std::vector<std::uint32_t> freqs,
                                             std::uint32_t total)
    : freqs_(std::move(freqs)), total_(total) {
  if (freqs_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty distribution");
  if (total_ > kFrequencyTotal) {
    throw Error(ErrorCode::kInvalidArgument, "distribution total exceeds 2^16");
  }
  cumulative_.resize(freqs_.size() + 1);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (freqs_[i] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "symbol " + std::to_string(i) + " has zero frequency");
    }
    cumulative_[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(sum, total_));
    sum += freqs_[i];
  }
  if (sum != total_) {
    throw Error(ErrorCode::kInvalidArgument,
                "frequencies sum to " + std::to_string(sum) + ", expected " +
                    std::to_string(total_));
  }
  cumulative_.back() = total_;
}

TokenId QuantizedDistribution::find(std::uint32_t target) const {
  // First cumulative entry strictly above target, minus one.
  auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), target);
  return static_cast<TokenId>(it - cumulative_.begin() - 1);
}

namespace {

// Shared apportionment. `Scaled` supplies, per symbol, the floor of its
// scaled share, an ordering on fractional remainders and an ordering on raw
// probability, so the double and integer entry points give the same rule.
template <typename FloorFn, typename RemainderLess, typename ProbLess>
std::vector<std::uint32_t> apportion(std::size_t n, std::uint32_t total, FloorFn floor_of,
                                     RemainderLess remainder_less, ProbLess prob_less) {
  std::vector<std::uint32_t> freqs(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    freqs[i] = floor_of(i);
    assigned += freqs[i];
  }

  // Floors can only undershoot; any shortfall is at most n.
  if (assigned < total) {
    const std::size_t deficit = total - assigned;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto by_remainder = [&](std::uint32_t a, std::uint32_t b) {
      if (remainder_less(b, a)) return true;   // larger remainder first
      if (remainder_less(a, b)) return false;
      return a < b;                            // then lower id
    };
    if (deficit < n) {
      std::nth_element(order.begin(), order.begin() + deficit, order.end(), by_remainder);
    }
    for (std::size_t k = 0; k < deficit; ++k) ++freqs[order[k % n]];
  } else if (assigned > total) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities overshoot the total");
  }

  // Floor of one count per symbol.
  auto donor_before = [&](std::uint32_t a, std::uint32_t b) {
    // priority_queue pops the "largest"; we want max freq, then smaller
    // probability, then lower id.
    if (freqs[a] != freqs[b]) return freqs[a] < freqs[b];
    if (prob_less(a, b)) return false;
    if (prob_less(b, a)) return true;
    return a > b;
  };
  std::vector<std::uint32_t> zeros;
  for (std::size_t i = 0; i < n; ++i) {
    if (freqs[i] == 0) zeros.push_back(static_cast<std::uint32_t>(i));
  }
  if (!zeros.empty()) {
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, decltype(donor_before)> donors(
        donor_before);
    for (std::size_t i = 0; i < n; ++i) {
      if (freqs[i] > 1) donors.push(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t z : zeros) {
      const std::uint32_t d = donors.top();
      donors.pop();
      --freqs[d];
      freqs[z] = 1;
      if (freqs[d] > 1) donors.push(d);
    }
  }
  return freqs;
}

void check_size(std::size_t n, std::uint32_t total) {
  if (n > kMaxQuantizedVocabulary) {
    throw Error(ErrorCode::kVocabularyTooLarge,
                "vocabulary of " + std::to_string(n) + " exceeds 2^15 symbols");
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty probability vector");
  if (total < n || total > kFrequencyTotal) {
    throw Error(ErrorCode::kInvalidArgument, "total must lie in [V, 2^16]");
  }
}

}  // namespace

QuantizedDistribution quantize(std::span<const double> probs, std::uint32_t total) {
  check_size(probs.size(), total);
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities do not sum to 1");
  }

  std::vector<double> scaled(probs.size());
  std::vector<double> remainder(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    scaled[i] = probs[i] / sum * total;
    remainder[i] = scaled[i] - std::floor(scaled[i]);
  }
  auto freqs = apportion(
      probs.size(), total,
      [&](std::size_t i) { return static_cast<std::uint32_t>(std::floor(scaled[i])); },
      [&](std::uint32_t a, std::uint32_t b) { return remainder[a] < remainder[b]; },
      [&](std::uint32_t a, std::uint32_t b) { return probs[a] < probs[b]; });
  return QuantizedDistribution(std::move(freqs), total);
}

QuantizedDistribution quantize_counts(std::span<const std::uint64_t> weights,
                                      std::uint32_t total) {
  check_size(weights.size(), total);
  unsigned __int128 sum = 0;
  for (auto w : weights) sum += w;
  if (sum == 0) throw Error(ErrorCode::kInvalidArgument, "weights sum to zero");
  if (sum > (static_cast<unsigned __int128>(1) << 96)) {
    throw Error(ErrorCode::kInvalidArgument, "weights too large");
  }

  // share_i = w_i * total / sum; keep floor and remainder exactly.
  std::vector<std::uint32_t> floors(weights.size());
  std::vector<unsigned __int128> remainder(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const unsigned __int128 scaled = static_cast<unsigned __int128>(weights[i]) * total;
    floors[i] = static_cast<std::uint32_t>(scaled / sum);
    remainder[i] = scaled % sum;
  }
  auto freqs = apportion(
      weights.size(), total, [&](std::size_t i) { return floors[i]; },
      [&](std::uint32_t a, std::uint32_t b) { return remainder[a] < remainder[b]; },
      [&](std::uint32_t a, std::uint32_t b) { return weights[a] < weights[b]; });
  return QuantizedDistribution(std::move(freqs), total);
}

}  // namespace lmac
