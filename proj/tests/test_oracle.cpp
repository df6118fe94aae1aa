// Integer coder against the exact-arithmetic reference coder.

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <random>

#include "exact_coder.hpp"
#include "lmac/arith_coder.hpp"
#include "test_util.hpp"

using namespace lmac;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using lmac::testing::BigExactCoder;

namespace {

struct Case {
  std::vector<QuantizedDistribution> dists;
  std::vector<TokenId> tokens;
};

Case random_case(std::mt19937_64& rng, bool dyadic, std::size_t max_len = 32) {
  const auto size = static_cast<std::uint32_t>(2 + rng() % 7);
  const std::size_t n = rng() % (max_len + 1);
  Case c;
  const bool is_static = rng() % 2 == 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || !is_static) {
      c.dists.push_back(dyadic ? lmac::testing::random_dyadic_distribution(rng, size)
                               : lmac::testing::random_distribution(rng, size));
    } else {
      c.dists.push_back(c.dists.back());
    }
    // Favour likely symbols half the time so long messages stay cheap.
    TokenId t = static_cast<TokenId>(rng() % size);
    if (rng() % 2) {
      for (TokenId s = 0; s < size; ++s) {
        if (c.dists.back().freq(s) > c.dists.back().freq(t)) t = s;
      }
    }
    c.tokens.push_back(t);
  }
  return c;
}

BitString integer_encode(const Case& c) {
  ArithmeticEncoder enc;
  for (std::size_t i = 0; i < c.tokens.size(); ++i) enc.encode(c.dists[i], c.tokens[i]);
  return enc.finish();
}

std::vector<TokenId> integer_decode(const BitString& bits, const Case& c) {
  BitReader reader(bits);
  ArithmeticDecoder dec(reader);
  std::vector<TokenId> out;
  for (const auto& d : c.dists) out.push_back(dec.decode(d));
  return out;
}

BitString oracle_encode(const Case& c) {
  BigExactCoder oracle;
  for (std::size_t i = 0; i < c.tokens.size(); ++i) oracle.encode(c.dists[i], c.tokens[i]);
  return oracle.finish();
}

std::vector<TokenId> oracle_decode(const BitString& bits, const Case& c) {
  return BigExactCoder::decode(bits, c.dists.size(),
                               [&](std::size_t i) -> const QuantizedDistribution& { return c.dists[i]; });
}

cpp_rational bits_value(const BitString& bits, std::size_t from, std::size_t count) {
  cpp_int v = 0;
  for (std::size_t i = from; i < from + count; ++i) v = (v << 1) | (bits[i] ? 1 : 0);
  return cpp_rational(v);
}

}  // namespace

TEST(ExactCoder, FinalWidthIsProductOfProbabilities) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 500; ++trial) {
    const Case c = random_case(rng, false);
    BigExactCoder oracle;
    cpp_rational product = 1;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
      oracle.encode(c.dists[i], c.tokens[i]);
      product *= cpp_rational(c.dists[i].freq(c.tokens[i]), c.dists[i].total());
    }
    const auto& iv = oracle.interval();
    const cpp_rational width(iv.width(), cpp_int(1) << iv.exponent);
    ASSERT_EQ(width, product);
  }
}

TEST(ExactCoder, RoundTripAndLength) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 500; ++trial) {
    const Case c = random_case(rng, false);
    const BitString bits = oracle_encode(c);
    ASSERT_EQ(oracle_decode(bits, c), c.tokens);
    double nll = 0;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) nll -= std::log2(c.dists[i].probability(c.tokens[i]));
    ASSERT_LE(static_cast<double>(bits.size()), std::ceil(nll) + 2);
  }
}

TEST(ExactCoder, ShortestPointMatchesSearch) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 3000; ++trial) {
    const Case c = random_case(rng, trial % 2 == 0, 6);
    BigExactCoder oracle;
    lmac::testing::WideExactCoder wide;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
      oracle.encode(c.dists[i], c.tokens[i]);
      wide.encode(c.dists[i], c.tokens[i]);
    }
    ASSERT_EQ(oracle.finish(), oracle.finish_by_search()) << trial;
    ASSERT_EQ(wide.finish(), oracle.finish()) << trial;
  }
}

TEST(OracleEquivalence, DyadicStreamsDecodeBothWays) {
  // Under power-of-two counts the integer coder's arithmetic is exact, so
  // both coders partition the unit interval identically.
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 2000; ++trial) {
    const Case c = random_case(rng, true);
    const BitString ib = integer_encode(c);
    const BitString ob = oracle_encode(c);
    ASSERT_EQ(integer_decode(ib, c), c.tokens);
    ASSERT_EQ(oracle_decode(ib, c), c.tokens) << trial;
    ASSERT_EQ(integer_decode(ob, c), c.tokens) << trial;
  }
}

TEST(OracleEquivalence, ShortGeneralStreamsDecodeBothWays) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 5000; ++trial) {
    const Case c = random_case(rng, false, 3);
    const BitString ib = integer_encode(c);
    const BitString ob = oracle_encode(c);
    ASSERT_EQ(oracle_decode(ib, c), c.tokens) << trial;
    ASSERT_EQ(integer_decode(ob, c), c.tokens) << trial;
  }
}

TEST(StateMonotonicity, AbsoluteIntervalOnlyShrinks) {
  // Absolute interval implied by the emitted bits B (b of them), the pending
  // count p and a register value x:
  //   (B + 1/2 + (x / 2^32 - 1/2) / 2^p) / 2^b
  std::mt19937_64 rng(56);
  auto absolute = [](const BitString& bits, std::uint64_t pending, std::uint64_t x) {
    const std::size_t b = bits.size();
    const cpp_rational frame = cpp_rational(1, 2) +
                               (cpp_rational(cpp_int(x), cpp_int(1) << 32) - cpp_rational(1, 2)) /
                                   cpp_rational(cpp_int(1) << pending);
    return (bits_value(bits, 0, b) + frame) / cpp_rational(cpp_int(1) << b);
  };
  for (int trial = 0; trial < 300; ++trial) {
    const Case c = random_case(rng, false);
    ArithmeticEncoder enc;
    cpp_rational lo = 0, hi = 1;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
      enc.encode(c.dists[i], c.tokens[i]);
      const auto& s = enc.state();
      const cpp_rational nlo = absolute(enc.bits(), s.pending_bits, s.low);
      const cpp_rational nhi = absolute(enc.bits(), s.pending_bits, std::uint64_t{s.high} + 1);
      ASSERT_GE(nlo, lo) << trial << " step " << i;
      ASSERT_LE(nhi, hi) << trial << " step " << i;
      ASSERT_LT(nlo, nhi);
      lo = nlo;
      hi = nhi;
    }
    // The flushed code point lands in the last interval.
    const BitString bits = enc.finish();
    const cpp_rational v = bits_value(bits, 0, bits.size()) / cpp_rational(cpp_int(1) << bits.size());
    ASSERT_GE(v, lo);
    ASSERT_LT(v, hi);
  }
}
