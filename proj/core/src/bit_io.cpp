#include "lmac/bit_io.hpp"

#include "lmac/error.hpp"

namespace lmac {

BitString BitString::from_bytes(std::vector<std::uint8_t> bytes, std::size_t bit_count) {
  if (bit_count > bytes.size() * 8) {
    throw Error(ErrorCode::kInvalidArgument, "bit count exceeds byte buffer");
  }
  BitString out;
  bytes.resize((bit_count + 7) / 8);
  if (bit_count % 8 != 0) {
    bytes.back() &= static_cast<std::uint8_t>(0xFF << (8 - bit_count % 8));
  }
  out.bytes_ = std::move(bytes);
  out.size_ = bit_count;
  return out;
}

void BitString::push_back(bool bit) {
  if ((size_ & 7) == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80 >> (size_ & 7));
  ++size_;
}

void BitString::append(const BitString& other) {
  for (std::size_t i = 0; i < other.size(); ++i) push_back(other[i]);
}

void BitString::append_run(bool bit, std::uint64_t count) {
  // Fill the partial byte, then whole bytes.
  while (count > 0 && (size_ & 7) != 0) {
    push_back(bit);
    --count;
  }
  const std::uint8_t fill = bit ? 0xFF : 0x00;
  bytes_.insert(bytes_.end(), count / 8, fill);
  size_ += (count / 8) * 8;
  for (std::uint64_t i = 0; i < count % 8; ++i) push_back(bit);
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_count,
                     std::size_t max_padding)
    : bytes_(bytes), bit_count_(bit_count), max_padding_(max_padding) {
  if (bit_count > bytes.size() * 8) {
    throw Error(ErrorCode::kInvalidArgument, "bit count exceeds byte buffer");
  }
}

BitReader::BitReader(const BitString& bits, std::size_t max_padding)
    : BitReader(bits.bytes(), bits.size(), max_padding) {}

bool BitReader::read_bit() {
  const std::size_t index = position_++;
  if (index < bit_count_) return (bytes_[index >> 3] >> (7 - (index & 7))) & 1;
  if (index - bit_count_ >= max_padding_) {
    throw Error(ErrorCode::kCorruptStream, "bit stream exhausted before the message terminated");
  }
  return false;
}

}  // namespace lmac
