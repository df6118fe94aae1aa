#include "lmac/container.hpp"

#include <algorithm>

#include "lmac/error.hpp"

namespace lmac {

std::vector<std::uint8_t> write_container(const ContainerHeader& header, const BitString& payload) {
  if (header.model_id.size() > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "model id longer than 65535 bytes");
  }
  std::vector<std::uint8_t> out;
  out.reserve(header.encoded_size() + payload.bytes().size());
  out.insert(out.end(), std::begin(kContainerMagic), std::end(kContainerMagic));
  out.push_back(kContainerVersion);
  out.push_back(static_cast<std::uint8_t>(header.tokenizer));
  const auto id_len = static_cast<std::uint16_t>(header.model_id.size());
  out.push_back(static_cast<std::uint8_t>(id_len >> 8));
  out.push_back(static_cast<std::uint8_t>(id_len));
  out.insert(out.end(), header.model_id.begin(), header.model_id.end());
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(header.original_length >> shift));
  }
  out.insert(out.end(), payload.bytes().begin(), payload.bytes().end());
  return out;
}

Container read_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || !std::equal(std::begin(kContainerMagic), std::end(kContainerMagic),
                                      bytes.begin(), [](char a, std::uint8_t b) {
                                        return static_cast<std::uint8_t>(a) == b;
                                      })) {
    throw Error(ErrorCode::kFormat, "not an LMAC container (bad magic)");
  }
  if (bytes[4] != kContainerVersion) {
    throw Error(ErrorCode::kFormat, "unsupported container version " + std::to_string(bytes[4]));
  }
  Container c;
  switch (bytes[5]) {
    case 0x00: c.header.tokenizer = TokenizerId::kByte; break;
    case 0x01: c.header.tokenizer = TokenizerId::kBridge; break;
    default: throw Error(ErrorCode::kFormat, "unknown tokenizer id " + std::to_string(bytes[5]));
  }
  const std::size_t id_len = (std::size_t{bytes[6]} << 8) | bytes[7];
  if (bytes.size() < 16 + id_len) throw Error(ErrorCode::kFormat, "truncated container header");
  c.header.model_id.assign(reinterpret_cast<const char*>(bytes.data() + 8), id_len);
  std::uint64_t length = 0;
  for (std::size_t i = 0; i < 8; ++i) length = (length << 8) | bytes[8 + id_len + i];
  c.header.original_length = length;
  c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(16 + id_len), bytes.end());
  return c;
}

}  // namespace lmac
