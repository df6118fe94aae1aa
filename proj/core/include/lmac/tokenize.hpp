#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lmac/distribution.hpp"

namespace lmac {

/// Tokenizer registry, stored as one byte in the container header.
enum class TokenizerId : std::uint8_t {
  kByte = 0x00,
  kBridge = 0x01,
};

const char* to_string(TokenizerId id);
/// Parses "byte" or "bridge"; throws kInvalidArgument otherwise.
TokenizerId parse_tokenizer_id(const std::string& name);

/// Token ids over a vocabulary, excluding the stream-terminating EOS.
class TokenStream {
 public:
  /// Throws kInvalidArgument if an id is outside the vocabulary or equals
  /// the EOS id.
  TokenStream(std::vector<TokenId> ids, const Vocabulary& vocab, TokenizerId tokenizer);

  std::span<const TokenId> ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const Vocabulary& vocabulary() const { return vocab_; }
  TokenizerId tokenizer() const { return tokenizer_; }

  friend bool operator==(const TokenStream&, const TokenStream&) = default;

 private:
  std::vector<TokenId> ids_;
  Vocabulary vocab_;
  TokenizerId tokenizer_;
};

/// Byte-level vocabulary: ids 0-255 are bytes, 256 is EOS.
inline const Vocabulary kByteVocabulary{257, 256};

TokenStream byte_tokenize(std::span<const std::uint8_t> text);
TokenStream byte_tokenize(const std::string& text);
/// Throws kInvalidArgument if the stream is not byte-level.
std::string byte_detokenize(const TokenStream& tokens);

/// Reversible text <-> token mapping.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenizerId id() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  /// Throws kTokenizerLossy if the text would not survive a round trip.
  virtual TokenStream tokenize(const std::string& text) = 0;
  virtual std::string detokenize(const TokenStream& tokens) = 0;
};

class ByteTokenizer final : public Tokenizer {
 public:
  TokenizerId id() const override { return TokenizerId::kByte; }
  const Vocabulary& vocabulary() const override { return kByteVocabulary; }
  TokenStream tokenize(const std::string& text) override { return byte_tokenize(text); }
  std::string detokenize(const TokenStream& tokens) override { return byte_detokenize(tokens); }
};

}  // namespace lmac
