#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lmac/bit_io.hpp"
#include "lmac/tokenize.hpp"

namespace lmac {

// Compressed file layout (all integers big-endian):
//
//   offset  size  field
//   0       4     magic "LMAC"
//   4       1     version (0x01)
//   5       1     tokenizer id
//   6       2     model-id length L
//   8       L     model id, UTF-8
//   8+L     8     original length in bytes
//   16+L    ...   arithmetic-code payload, zero-padded to a whole byte

inline constexpr std::uint8_t kContainerVersion = 0x01;
inline constexpr char kContainerMagic[4] = {'L', 'M', 'A', 'C'};

struct ContainerHeader {
  TokenizerId tokenizer = TokenizerId::kByte;
  std::string model_id;
  std::uint64_t original_length = 0;

  std::size_t encoded_size() const { return 16 + model_id.size(); }
};

struct Container {
  ContainerHeader header;
  /// Payload bytes; the exact payload bit length is not stored since the
  /// stream terminates itself.
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> write_container(const ContainerHeader& header, const BitString& payload);

/// Throws kFormat on a bad magic, unknown version, unknown tokenizer id or
/// truncated header.
Container read_container(std::span<const std::uint8_t> bytes);

}  // namespace lmac
