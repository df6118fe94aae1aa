#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lmac {

/// Append-only sequence of bits, packed MSB-first into bytes.
class BitString {
 public:
  BitString() = default;

  /// Wraps already-packed bytes; only the first `bit_count` bits are used.
  static BitString from_bytes(std::vector<std::uint8_t> bytes, std::size_t bit_count);

  void push_back(bool bit);
  void append(const BitString& other);
  /// Appends `count` copies of `bit`.
  void append_run(bool bit, std::uint64_t count);

  bool operator[](std::size_t index) const {
    return (bytes_[index >> 3] >> (7 - (index & 7))) & 1;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  /// Packed bytes; the final byte is zero-padded.
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  friend bool operator==(const BitString& a, const BitString& b) {
    return a.size_ == b.size_ && a.bytes_ == b.bytes_;
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

/// Reads bits MSB-first. Past the end of the data the reader yields zero
/// bits, up to `max_padding` of them; reading further throws a
/// corrupt-stream error.
class BitReader {
 public:
  static constexpr std::size_t kDefaultMaxPadding = 64;

  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_count,
            std::size_t max_padding = kDefaultMaxPadding);
  explicit BitReader(const BitString& bits,
                     std::size_t max_padding = kDefaultMaxPadding);

  bool read_bit();

  /// Number of bits consumed so far, including zero padding.
  std::size_t position() const { return position_; }
  std::size_t size() const { return bit_count_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bit_count_;
  std::size_t max_padding_;
  std::size_t position_ = 0;
};

}  // namespace lmac
