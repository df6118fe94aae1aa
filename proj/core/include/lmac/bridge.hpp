#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lmac/distribution.hpp"
#include "lmac/model.hpp"
#include "lmac/tokenize.hpp"

namespace lmac {

// Client side of the model bridge: an external process that serves a
// pretrained model's tokenizer and next-token distributions as
// newline-delimited JSON records, one request and one reply per line.
//
//   {"id":1,"op":"hello"}
//     -> {"id":1,"ok":true,"model":"gpt2","vocab":50257,"eos":50256,
//         "max_context":1024,"protocol":"lmac-bridge/1"}
//   {"id":2,"op":"dist","ctx":[50256,464]}  -> {"id":2,"ok":true,"freqs":[...]}
//   {"id":3,"op":"tok","text":"hi"}         -> {"id":3,"ok":true,"ids":[...],"lossy":false}
//   {"id":4,"op":"detok","ids":[...]}       -> {"id":4,"ok":true,"text":"hi"}
//   errors                                  -> {"id":n,"ok":false,"code":"bad-op","message":"..."}
//
// Frequencies are integers already quantized to 2^16 by the bridge; no
// floating-point values cross the wire.

inline constexpr const char* kBridgeProtocol = "lmac-bridge/1";

/// Moves one request line to the bridge and returns its reply line.
class BridgeTransport {
 public:
  virtual ~BridgeTransport() = default;
  virtual std::string exchange(const std::string& request) = 0;
};

/// Runs `command` through /bin/sh and talks to it over its stdin/stdout.
class ProcessTransport final : public BridgeTransport {
 public:
  explicit ProcessTransport(const std::string& command);
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  std::string exchange(const std::string& request) override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Replays a transcript recorded by RecordingTransport. Each request must
/// match the recorded one exactly.
class ReplayTransport final : public BridgeTransport {
 public:
  explicit ReplayTransport(const std::string& transcript_path);
  std::string exchange(const std::string& request) override;

  /// Requests not yet replayed.
  std::size_t remaining() const { return entries_.size() - next_; }

 private:
  struct Entry {
    std::string request;  // canonical JSON
    std::string reply;
  };
  std::vector<Entry> entries_;
  std::size_t next_ = 0;
};

/// Forwards to another transport and appends every exchange to a
/// transcript file, one {"request":...,"reply":...} object per line.
class RecordingTransport final : public BridgeTransport {
 public:
  RecordingTransport(std::unique_ptr<BridgeTransport> inner, const std::string& transcript_path);
  std::string exchange(const std::string& request) override;

 private:
  std::unique_ptr<BridgeTransport> inner_;
  std::ofstream out_;
};

struct BridgeInfo {
  std::string model;
  std::uint32_t vocab_size = 0;
  TokenId eos_id = 0;
  std::uint32_t max_context = 0;
  std::string protocol;
};

struct BridgeTokens {
  std::vector<TokenId> ids;
  bool lossy = false;
};

/// A handshaken bridge session. Requests are serialized per connection, so
/// a connection may be shared between models used from several threads.
class BridgeConnection {
 public:
  /// Performs the hello handshake. Throws kProtocol if the reply is
  /// malformed or speaks another protocol version.
  explicit BridgeConnection(std::unique_ptr<BridgeTransport> transport);

  const BridgeInfo& info() const { return info_; }
  Vocabulary vocabulary() const { return Vocabulary(info_.vocab_size, info_.eos_id); }

  /// Distribution after `context`, validated against the vocabulary size
  /// and the 2^16 total.
  QuantizedDistribution distribution(std::span<const TokenId> context);
  BridgeTokens tokenize(const std::string& text);
  std::string detokenize(std::span<const TokenId> ids);

 private:
  struct Reply;
  Reply call(const std::string& op, const std::string& payload_json);

  std::unique_ptr<BridgeTransport> transport_;
  std::mutex mutex_;
  std::uint64_t next_id_ = 1;
  BridgeInfo info_;
};

/// Opens a connection for an endpoint string: "replay:<transcript>" replays
/// a recorded session, anything else is a shell command to launch.
std::shared_ptr<BridgeConnection> connect_bridge(const std::string& endpoint);

/// Forwards contexts (trailing max_context tokens) to the bridge.
class BridgeModel final : public ProbabilityModel {
 public:
  explicit BridgeModel(std::shared_ptr<BridgeConnection> connection);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::string id() const override { return "bridge:" + connection_->info().model; }
  const QuantizedDistribution& next_distribution(const ModelContext& ctx) override;
  double raw_probability(TokenId token) const override { return dist_.probability(token); }
  std::unique_ptr<ProbabilityModel> fresh() const override;

 private:
  std::shared_ptr<BridgeConnection> connection_;
  Vocabulary vocab_;
  QuantizedDistribution dist_;
};

std::unique_ptr<ProbabilityModel> make_bridge_model(std::shared_ptr<BridgeConnection> connection,
                                                    const Vocabulary& expected_vocab);

/// The bridge model's own tokenizer.
class BridgeTokenizer final : public Tokenizer {
 public:
  explicit BridgeTokenizer(std::shared_ptr<BridgeConnection> connection);

  TokenizerId id() const override { return TokenizerId::kBridge; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  TokenStream tokenize(const std::string& text) override;
  std::string detokenize(const TokenStream& tokens) override;

 private:
  std::shared_ptr<BridgeConnection> connection_;
  Vocabulary vocab_;
};

TokenStream bridge_tokenize(BridgeConnection& connection, const std::string& text);
std::string bridge_detokenize(BridgeConnection& connection, const TokenStream& tokens);

}  // namespace lmac
