#include "lmac/error.hpp"

namespace lmac {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInput: return "input";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kVocabularyTooLarge: return "vocabulary-too-large";
    case ErrorCode::kModelContract: return "model-contract";
    case ErrorCode::kModelMismatch: return "model-mismatch";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kTokenizerLossy: return "tokenizer-lossy";
    case ErrorCode::kCorruptStream: return "corrupt-stream";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInput:
    case ErrorCode::kFormat:
      return kExitInput;
    case ErrorCode::kVocabularyTooLarge:
    case ErrorCode::kModelContract:
    case ErrorCode::kModelMismatch:
    case ErrorCode::kProtocol:
    case ErrorCode::kTransport:
    case ErrorCode::kTokenizerLossy:
      return kExitModel;
    case ErrorCode::kCorruptStream:
      return kExitCorrupt;
  }
  return kExitInput;
}

}  // namespace lmac
