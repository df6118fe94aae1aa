#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmac/bridge.hpp"
#include "lmac/corpus.hpp"
#include "lmac/model.hpp"
#include "lmac/tokenize.hpp"

namespace lmac::cli {

/// Environment variable that overrides any bridge endpoint given on the
/// command line.
inline constexpr const char* kBridgeEndpointEnv = "LMAC_BRIDGE_ENDPOINT";

/// Parsed `--model` value: "uniform", "ngram:<k>", "bridge" or
/// "bridge:<endpoint>".
struct ModelSpec {
  enum class Kind { kUniform, kNgram, kBridge };
  Kind kind = Kind::kUniform;
  unsigned order = 0;
  std::string endpoint;
};

ModelSpec parse_model_spec(const std::string& text);

struct RunConfig {
  std::string command;
  std::string model = "ngram:3";
  std::string tokenizer = "byte";
  std::string bridge;  // endpoint for bridge model / tokenizer
  EvalMode mode = EvalMode::kEstimated;
  std::size_t chunk_words = kDefaultWordsPerChunk;
  std::size_t max_chunks = kDefaultMaxChunks;
  unsigned jobs = 1;
  std::filesystem::path input;
  std::filesystem::path out;
  std::vector<std::filesystem::path> reports;
  std::vector<std::filesystem::path> scores;
  std::filesystem::path accuracy;
};

/// Model and tokenizer built from a RunConfig; both may share one bridge
/// connection.
struct Toolchain {
  std::shared_ptr<BridgeConnection> bridge;
  std::unique_ptr<Tokenizer> tokenizer;
  std::unique_ptr<ProbabilityModel> model;
};

Toolchain build_toolchain(const RunConfig& config, TokenizerId tokenizer);

int cmd_compress(const RunConfig& config, std::ostream& out);
int cmd_decompress(const RunConfig& config, std::ostream& out);
int cmd_estimate(const RunConfig& config, std::ostream& out);
int cmd_evaluate(const RunConfig& config, std::ostream& out);
int cmd_rank(const RunConfig& config, std::ostream& out);

/// Parses argv-style arguments (without the program name), runs the
/// command and returns the process exit code. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes to a temporary sibling and renames it into place, so a failed
/// command never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);

}  // namespace lmac::cli
