#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "lmac/model.hpp"
#include "lmac/tokenize.hpp"

namespace lmac {

inline constexpr std::size_t kDefaultWordsPerChunk = 200;
inline constexpr std::size_t kDefaultMaxChunks = 10000;

/// Fixed-size word chunks cut from a whitespace-delimited corpus.
struct ChunkSet {
  std::vector<std::string> chunks;
  std::size_t words_per_chunk = kDefaultWordsPerChunk;
  /// SHA-256 of the source bytes, lowercase hex.
  std::string source_digest;

  std::size_t size() const { return chunks.size(); }
};

/// Splits on whitespace and joins each run of `words_per_chunk` words with
/// single spaces. A trailing partial chunk is dropped and at most
/// `max_chunks` chunks are kept. Throws kInput if the source holds fewer
/// than `words_per_chunk` words or cannot be read.
ChunkSet load_chunks(const std::filesystem::path& source,
                     std::size_t words_per_chunk = kDefaultWordsPerChunk,
                     std::size_t max_chunks = kDefaultMaxChunks);
ChunkSet chunk_text(const std::string& text, std::size_t words_per_chunk = kDefaultWordsPerChunk,
                    std::size_t max_chunks = kDefaultMaxChunks);

enum class EvalMode { kCoded, kEstimated };

const char* to_string(EvalMode mode);
EvalMode parse_eval_mode(const std::string& name);

struct ChunkResult {
  std::size_t index = 0;
  std::uint64_t original_bits = 0;
  double compressed_bits = 0.0;
};

struct ExcludedChunk {
  std::size_t index = 0;
  std::string reason;
};

struct CompressionReport {
  std::string model_id;
  EvalMode mode = EvalMode::kEstimated;
  TokenizerId tokenizer = TokenizerId::kByte;
  std::string source_digest;
  std::size_t words_per_chunk = 0;
  std::uint64_t original_bits = 0;
  double compressed_bits = 0.0;
  double ratio = 0.0;
  std::vector<ChunkResult> chunks;
  /// Chunks the tokenizer could not reproduce losslessly.
  std::vector<ExcludedChunk> excluded;
};

/// original / compressed. Throws kInvalidArgument unless both are positive.
double ratio(double original_bits, double compressed_bits);

/// Compresses (coded) or NLL-estimates (estimated) each chunk on its own,
/// with a fresh instance of `prototype` per chunk. original_bits is eight
/// per UTF-8 byte; coded compressed_bits is the payload bit count with no
/// container header. Chunks run on up to `jobs` threads; the report does
/// not depend on `jobs`. Errors abort the whole report, annotated with the
/// chunk index, except tokenizer-lossy chunks, which are listed in
/// `excluded`.
CompressionReport evaluate_model(const ProbabilityModel& prototype, const ChunkSet& chunks,
                                 EvalMode mode, Tokenizer& tokenizer, unsigned jobs = 1);

std::string report_to_json(const CompressionReport& report);
CompressionReport report_from_json(const std::string& text);
void write_report_summary(std::ostream& out, const CompressionReport& report);

}  // namespace lmac
