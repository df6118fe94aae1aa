#pragma once

#include <stdexcept>
#include <string>

namespace lmac {

enum class ErrorCode {
  kInvalidArgument,
  kInput,
  kFormat,            // bad magic / version / malformed container or table
  kVocabularyTooLarge,
  kModelContract,     // model returned a distribution of the wrong shape
  kModelMismatch,     // container written under a different model spec
  kProtocol,          // bridge reply violates the wire contract
  kTransport,         // bridge process / pipe failure
  kTokenizerLossy,
  kCorruptStream,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Process exit codes used by the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitModel = 4;
inline constexpr int kExitCorrupt = 5;

int exit_code_for(ErrorCode code);

}  // namespace lmac
