#include "lmac/corpus.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lmac/arith_coder.hpp"
#include "lmac/error.hpp"
#include "lmac/estimator.hpp"

namespace lmac {

using json = nlohmann::json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::kInput, "SHA-256 unavailable");
    }
  }
  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), digest, &len);
    std::ostringstream out;
    for (unsigned i = 0; i < len; ++i) {
      out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return out.str();
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

// Accumulates words into chunks, ignoring anything past max_chunks.
class Chunker {
 public:
  Chunker(std::size_t words_per_chunk, std::size_t max_chunks)
      : words_per_chunk_(words_per_chunk), max_chunks_(max_chunks) {
    if (words_per_chunk == 0) throw Error(ErrorCode::kInvalidArgument, "words per chunk must be positive");
  }

  bool full() const { return chunks_.size() >= max_chunks_; }

  void feed(const char* data, std::size_t n) {
    for (std::size_t i = 0; i < n && !full(); ++i) {
      const char c = data[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        end_word();
      } else {
        word_.push_back(c);
      }
    }
  }

  std::vector<std::string> finish() {
    end_word();
    return std::move(chunks_);
  }

 private:
  void end_word() {
    if (word_.empty() || full()) return;
    if (words_ > 0) current_.push_back(' ');
    current_ += word_;
    word_.clear();
    if (++words_ == words_per_chunk_) {
      chunks_.push_back(std::move(current_));
      current_.clear();
      words_ = 0;
    }
  }

  std::size_t words_per_chunk_;
  std::size_t max_chunks_;
  std::vector<std::string> chunks_;
  std::string current_;
  std::string word_;
  std::size_t words_ = 0;
};

ChunkSet finish_chunks(Chunker& chunker, std::size_t words_per_chunk, std::string digest) {
  ChunkSet set;
  set.chunks = chunker.finish();
  set.words_per_chunk = words_per_chunk;
  set.source_digest = std::move(digest);
  if (set.chunks.empty()) {
    throw Error(ErrorCode::kInput,
                "corpus has fewer than " + std::to_string(words_per_chunk) + " words");
  }
  return set;
}

}  // namespace

ChunkSet load_chunks(const std::filesystem::path& source, std::size_t words_per_chunk,
                     std::size_t max_chunks) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInput, "cannot read corpus " + source.string());
  Chunker chunker(words_per_chunk, max_chunks);
  Sha256 sha;
  std::vector<char> buffer(1 << 20);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto n = static_cast<std::size_t>(in.gcount());
    if (n == 0) break;
    sha.update(buffer.data(), n);
    chunker.feed(buffer.data(), n);
  }
  if (in.bad()) throw Error(ErrorCode::kInput, "error reading corpus " + source.string());
  return finish_chunks(chunker, words_per_chunk, sha.hex());
}

ChunkSet chunk_text(const std::string& text, std::size_t words_per_chunk, std::size_t max_chunks) {
  Chunker chunker(words_per_chunk, max_chunks);
  Sha256 sha;
  sha.update(text.data(), text.size());
  chunker.feed(text.data(), text.size());
  return finish_chunks(chunker, words_per_chunk, sha.hex());
}

const char* to_string(EvalMode mode) {
  return mode == EvalMode::kCoded ? "coded" : "estimated";
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "coded") return EvalMode::kCoded;
  if (name == "estimated") return EvalMode::kEstimated;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + name + "' (coded|estimated)");
}

double ratio(double original_bits, double compressed_bits) {
  if (!(original_bits > 0.0) || !(compressed_bits > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "compression ratio needs positive bit counts");
  }
  return original_bits / compressed_bits;
}

namespace {

struct ChunkOutcome {
  ChunkResult result;
  bool excluded = false;
  std::string reason;
  std::exception_ptr error;
};

ChunkOutcome evaluate_chunk(const ProbabilityModel& prototype, const std::string& text,
                            std::size_t index, EvalMode mode, Tokenizer& tokenizer) {
  ChunkOutcome out;
  out.result.index = index;
  out.result.original_bits = 8ull * text.size();
  TokenStream tokens = [&]() -> TokenStream {
    try {
      return tokenizer.tokenize(text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTokenizerLossy) throw;
      out.excluded = true;
      out.reason = e.what();
      return TokenStream({}, tokenizer.vocabulary(), tokenizer.id());
    }
  }();
  if (out.excluded) return out;

  auto model = prototype.fresh();
  if (mode == EvalMode::kCoded) {
    out.result.compressed_bits = static_cast<double>(encode_stream(*model, tokens).size());
  } else {
    out.result.compressed_bits = nll_bits(*model, tokens).total_bits;
  }
  return out;
}

}  // namespace

CompressionReport evaluate_model(const ProbabilityModel& prototype, const ChunkSet& chunks,
                                 EvalMode mode, Tokenizer& tokenizer, unsigned jobs) {
  if (chunks.chunks.empty()) throw Error(ErrorCode::kInput, "no chunks to evaluate");
  if (jobs == 0) throw Error(ErrorCode::kInvalidArgument, "jobs must be at least 1");

  std::vector<ChunkOutcome> outcomes(chunks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < chunks.size() && !failed; i = next++) {
      try {
        outcomes[i] = evaluate_chunk(prototype, chunks.chunks[i], i, mode, tokenizer);
      } catch (...) {
        outcomes[i].error = std::current_exception();
        failed = true;
      }
    }
  };
  const unsigned threads = std::min<std::size_t>(jobs, chunks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  CompressionReport report;
  report.model_id = prototype.id();
  report.mode = mode;
  report.tokenizer = tokenizer.id();
  report.source_digest = chunks.source_digest;
  report.words_per_chunk = chunks.words_per_chunk;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error) {
      try {
        std::rethrow_exception(outcomes[i].error);
      } catch (const Error& e) {
        throw Error(e.code(), "chunk " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  for (auto& o : outcomes) {
    if (o.excluded) {
      report.excluded.push_back({o.result.index, o.reason});
      continue;
    }
    report.original_bits += o.result.original_bits;
    report.compressed_bits += o.result.compressed_bits;
    report.chunks.push_back(o.result);
  }
  if (report.chunks.empty()) throw Error(ErrorCode::kInput, "every chunk was excluded");
  report.ratio = ratio(static_cast<double>(report.original_bits), report.compressed_bits);
  return report;
}

std::string report_to_json(const CompressionReport& report) {
  json doc;
  doc["model"] = report.model_id;
  doc["mode"] = to_string(report.mode);
  doc["tokenizer"] = to_string(report.tokenizer);
  doc["source_digest"] = report.source_digest;
  doc["words_per_chunk"] = report.words_per_chunk;
  doc["original_bits"] = report.original_bits;
  doc["compressed_bits"] = report.compressed_bits;
  doc["ratio"] = report.ratio;
  json chunks = json::array();
  for (const auto& c : report.chunks) {
    chunks.push_back({{"index", c.index},
                      {"original_bits", c.original_bits},
                      {"compressed_bits", c.compressed_bits}});
  }
  doc["chunks"] = std::move(chunks);
  json excluded = json::array();
  for (const auto& e : report.excluded) excluded.push_back({{"index", e.index}, {"reason", e.reason}});
  doc["excluded"] = std::move(excluded);
  return doc.dump(2) + "\n";
}

CompressionReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    CompressionReport r;
    r.model_id = doc.at("model").get<std::string>();
    r.mode = parse_eval_mode(doc.at("mode").get<std::string>());
    r.tokenizer = parse_tokenizer_id(doc.value("tokenizer", std::string("byte")));
    r.source_digest = doc.value("source_digest", std::string());
    r.words_per_chunk = doc.value("words_per_chunk", std::size_t{0});
    r.original_bits = doc.at("original_bits").get<std::uint64_t>();
    r.compressed_bits = doc.at("compressed_bits").get<double>();
    r.ratio = doc.at("ratio").get<double>();
    for (const json& c : doc.value("chunks", json::array())) {
      r.chunks.push_back({c.at("index").get<std::size_t>(), c.at("original_bits").get<std::uint64_t>(),
                          c.at("compressed_bits").get<double>()});
    }
    for (const json& e : doc.value("excluded", json::array())) {
      r.excluded.push_back({e.at("index").get<std::size_t>(), e.at("reason").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed compression report: ") + e.what());
  }
}

void write_report_summary(std::ostream& out, const CompressionReport& report) {
  const auto flags = out.flags();
  out << "model:           " << report.model_id << '\n'
      << "mode:            " << to_string(report.mode) << '\n'
      << "tokenizer:       " << to_string(report.tokenizer) << '\n'
      << "chunks:          " << report.chunks.size();
  if (!report.excluded.empty()) out << " (" << report.excluded.size() << " excluded)";
  out << '\n'
      << "original bits:   " << report.original_bits << '\n'
      << std::fixed << std::setprecision(1)
      << "compressed bits: " << report.compressed_bits << '\n'
      << std::setprecision(4) << "ratio:           " << report.ratio << '\n';
  out.flags(flags);
}

}  // namespace lmac
