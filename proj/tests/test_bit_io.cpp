#include <gtest/gtest.h>

#include "lmac/bit_io.hpp"
#include "lmac/error.hpp"
#include "test_util.hpp"

using namespace lmac;
using lmac::testing::error_code_of;

TEST(BitString, EmptyIsValid) {
  BitString b;
  EXPECT_TRUE(b.empty());
  EXPECT_EQ(b.size(), 0u);
  EXPECT_TRUE(b.bytes().empty());
}

TEST(BitString, PacksMsbFirst) {
  BitString b;
  for (int bit : {1, 0, 1, 1, 0, 0, 0, 0, 1}) b.push_back(bit != 0);
  ASSERT_EQ(b.size(), 9u);
  ASSERT_EQ(b.bytes().size(), 2u);
  EXPECT_EQ(b.bytes()[0], 0xB0);
  EXPECT_EQ(b.bytes()[1], 0x80);
  EXPECT_TRUE(b[0]);
  EXPECT_FALSE(b[1]);
  EXPECT_TRUE(b[8]);
}

TEST(BitString, AppendRunAndAppend) {
  BitString a;
  a.push_back(true);
  a.append_run(false, 10);
  a.append_run(true, 3);
  BitString b;
  b.push_back(false);
  b.append(a);
  ASSERT_EQ(b.size(), 15u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const bool expected = i == 1 || i >= 12;
    EXPECT_EQ(b[i], expected) << i;
  }
}

TEST(BitString, FromBytesRoundTrip) {
  BitString a;
  for (int i = 0; i < 21; ++i) a.push_back(i % 3 == 0);
  BitString b = BitString::from_bytes(a.bytes(), a.size());
  EXPECT_EQ(a, b);
  EXPECT_EQ(error_code_of([&] { BitString::from_bytes({0xFF}, 9); }), ErrorCode::kInvalidArgument);
}

TEST(BitReader, ZeroPaddingThenCorrupt) {
  BitString a;
  a.push_back(true);
  BitReader r(a, 3);
  EXPECT_TRUE(r.read_bit());
  EXPECT_FALSE(r.read_bit());
  EXPECT_FALSE(r.read_bit());
  EXPECT_FALSE(r.read_bit());
  EXPECT_EQ(r.position(), 4u);
  EXPECT_EQ(error_code_of([&] { r.read_bit(); }), ErrorCode::kCorruptStream);
}
