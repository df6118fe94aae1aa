#include "lmac/tokenize.hpp"

#include "lmac/error.hpp"

namespace lmac {

const char* to_string(TokenizerId id) {
  switch (id) {
    case TokenizerId::kByte: return "byte";
    case TokenizerId::kBridge: return "bridge";
  }
  return "unknown";
}

TokenizerId parse_tokenizer_id(const std::string& name) {
  if (name == "byte") return TokenizerId::kByte;
  if (name == "bridge") return TokenizerId::kBridge;
  throw Error(ErrorCode::kInvalidArgument, "unknown tokenizer '" + name + "'");
}

TokenStream::TokenStream(std::vector<TokenId> ids, const Vocabulary& vocab,
                         TokenizerId tokenizer)
    : ids_(std::move(ids)), vocab_(vocab), tokenizer_(tokenizer) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!vocab_.contains(ids_[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token " + std::to_string(ids_[i]) + " at " + std::to_string(i) +
                      " outside vocabulary");
    }
    if (ids_[i] == vocab_.eos_id()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "EOS token inside stream at position " + std::to_string(i));
    }
  }
}

TokenStream byte_tokenize(std::span<const std::uint8_t> text) {
  return TokenStream(std::vector<TokenId>(text.begin(), text.end()), kByteVocabulary,
                     TokenizerId::kByte);
}

TokenStream byte_tokenize(const std::string& text) {
  return byte_tokenize(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string byte_detokenize(const TokenStream& tokens) {
  if (tokens.tokenizer() != TokenizerId::kByte || !(tokens.vocabulary() == kByteVocabulary)) {
    throw Error(ErrorCode::kInvalidArgument, "not a byte-level token stream");
  }
  std::string out;
  out.reserve(tokens.size());
  // TokenStream already rejects id 256, so every id is a byte.
  for (TokenId t : tokens.ids()) out.push_back(static_cast<char>(t));
  return out;
}

}  // namespace lmac
