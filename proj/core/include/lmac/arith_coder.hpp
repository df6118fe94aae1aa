#pragma once

#include <cstdint>
#include <functional>
#include <limits>

#include "lmac/bit_io.hpp"
#include "lmac/distribution.hpp"
#include "lmac/model.hpp"
#include "lmac/tokenize.hpp"

namespace lmac {

// Binary arithmetic coder with 32-bit interval registers.
//
// The interval is [low, high] with `high` inclusive. Coding a symbol with
// cumulative count F, count P and total T maps range = high - low + 1 to
//
//   low'  = low + floor(range * F / T)
//   high' = low + floor(range * (F + P) / T) - 1
//
// after which leading bits that are settled are shifted out. When the
// interval straddles the midpoint inside the middle half, the next bit is
// not yet known; it is deferred as a pending bit and the interval is
// expanded around the midpoint. Every renormalization leaves
// high - low >= 2^30, and T <= 2^16, so range / T >= 2^14 and no symbol
// with a nonzero count can collapse to an empty interval.

inline constexpr unsigned kRegisterBits = 32;
inline constexpr std::uint64_t kRegisterTop = (std::uint64_t{1} << kRegisterBits) - 1;
inline constexpr std::uint64_t kHalf = std::uint64_t{1} << (kRegisterBits - 1);
inline constexpr std::uint64_t kQuarter = std::uint64_t{1} << (kRegisterBits - 2);
inline constexpr std::uint64_t kThreeQuarters = kHalf + kQuarter;

struct CoderState {
  std::uint32_t low = 0;
  std::uint32_t high = std::numeric_limits<std::uint32_t>::max();
  std::uint64_t pending_bits = 0;

  std::uint64_t range() const { return std::uint64_t{high} - low + 1; }
  /// Ordering plus the quarter-interval rule that holds between calls.
  bool valid() const { return low < high && high - low >= kQuarter; }

  friend bool operator==(const CoderState&, const CoderState&) = default;
};

class ArithmeticEncoder {
 public:
  ArithmeticEncoder() = default;

  /// Narrows the interval to `token`'s slot and emits the bits that become
  /// settled. Returns the number of bits appended to the output.
  /// Throws kInvalidArgument if `token` is not in `dist`.
  std::size_t encode(const QuantizedDistribution& dist, TokenId token);

  /// Emits pending_bits + 2 disambiguating bits and returns the whole
  /// stream. The encoder must not be used afterwards.
  BitString finish();

  const CoderState& state() const { return state_; }
  /// Bits emitted so far (excluding pending bits).
  const BitString& bits() const { return out_; }

 private:
  void emit(bool bit);

  CoderState state_;
  BitString out_;
  bool finished_ = false;
};

class ArithmeticDecoder {
 public:
  /// Primes the value register with the first 32 bits of `reader`.
  explicit ArithmeticDecoder(BitReader& reader);

  /// Returns the token whose slot holds the current value and consumes it.
  /// Throws kCorruptStream if the reader runs dry.
  TokenId decode(const QuantizedDistribution& dist);

  const CoderState& state() const { return state_; }
  std::uint32_t value() const { return value_; }

 private:
  BitReader& reader_;
  CoderState state_;
  std::uint32_t value_ = 0;
};

/// Called once per coded symbol (including the terminal EOS) with the
/// distribution the coder used.
using CodingObserver = std::function<void(const QuantizedDistribution&, TokenId)>;

/// Codes t_1..t_n followed by one EOS, conditioning the first token on a
/// leading EOS that is never itself coded. The output is self-terminating.
/// Throws kModelContract if the model's distribution size differs from the
/// vocabulary size.
BitString encode_stream(ProbabilityModel& model, const TokenStream& tokens,
                        const CodingObserver& observer = {});

/// Inverse of encode_stream. Stops at the first decoded EOS. Throws
/// kCorruptStream if the bits run out first or more than `max_tokens`
/// tokens are produced.
TokenStream decode_stream(ProbabilityModel& model, const BitString& bits, TokenizerId tokenizer,
                          std::size_t max_tokens = std::numeric_limits<std::size_t>::max());

}  // namespace lmac
