#include "lmac/bridge.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include <nlohmann/json.hpp>

#include "lmac/error.hpp"

namespace lmac {

using json = nlohmann::json;

namespace {

[[noreturn]] void transport_failure(const std::string& what) {
  throw Error(ErrorCode::kTransport, what + ": " + std::strerror(errno));
}

[[noreturn]] void protocol_failure(const std::string& what) {
  throw Error(ErrorCode::kProtocol, "bridge protocol error: " + what);
}

}  // namespace

// ---------------------------------------------------------------------------
// ProcessTransport

ProcessTransport::ProcessTransport(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) transport_failure("pipe");
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    transport_failure("pipe");
  }
  // A bridge that dies mid-write must surface as an error, not kill us.
  signal(SIGPIPE, SIG_IGN);

  pid_ = fork();
  if (pid_ < 0) transport_failure("fork");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ProcessTransport::~ProcessTransport() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ <= 0) return;
  // Closing stdin asks the bridge to exit; give it a moment, then insist.
  for (int i = 0; i < 100; ++i) {
    if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  kill(pid_, SIGKILL);
  waitpid(pid_, nullptr, 0);
}

std::string ProcessTransport::exchange(const std::string& request) {
  std::string line = request + "\n";
  const char* data = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const ssize_t n = write(to_child_, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      transport_failure("write to bridge");
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }

  for (;;) {
    const auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string reply = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return reply;
    }
    char chunk[65536];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      transport_failure("read from bridge");
    }
    if (n == 0) throw Error(ErrorCode::kTransport, "bridge closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

// ---------------------------------------------------------------------------
// Transcripts

ReplayTransport::ReplayTransport(const std::string& transcript_path) {
  std::ifstream in(transcript_path);
  if (!in) throw Error(ErrorCode::kTransport, "cannot open transcript " + transcript_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json entry = json::parse(line);
      entries_.push_back({entry.at("request").dump(), entry.at("reply").dump()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, "bad transcript line: " + std::string(e.what()));
    }
  }
}

std::string ReplayTransport::exchange(const std::string& request) {
  if (next_ >= entries_.size()) {
    throw Error(ErrorCode::kTransport, "transcript exhausted");
  }
  std::string canonical;
  try {
    canonical = json::parse(request).dump();
  } catch (const json::exception&) {
    protocol_failure("request is not JSON");
  }
  const Entry& e = entries_[next_++];
  if (canonical != e.request) {
    throw Error(ErrorCode::kTransport,
                "request " + std::to_string(next_) + " diverges from transcript");
  }
  return e.reply;
}

RecordingTransport::RecordingTransport(std::unique_ptr<BridgeTransport> inner,
                                       const std::string& transcript_path)
    : inner_(std::move(inner)), out_(transcript_path, std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::kTransport, "cannot write transcript " + transcript_path);
}

std::string RecordingTransport::exchange(const std::string& request) {
  std::string reply = inner_->exchange(request);
  json entry;
  entry["request"] = json::parse(request);
  try {
    entry["reply"] = json::parse(reply);
  } catch (const json::exception&) {
    entry["reply"] = reply;
  }
  out_ << entry.dump() << '\n';
  out_.flush();
  return reply;
}

// ---------------------------------------------------------------------------
// BridgeConnection

struct BridgeConnection::Reply {
  json body;
};

BridgeConnection::Reply BridgeConnection::call(const std::string& op,
                                               const std::string& payload_json) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::uint64_t id = next_id_++;
  json request = payload_json.empty() ? json::object() : json::parse(payload_json);
  request["id"] = id;
  request["op"] = op;
  const std::string reply_line = transport_->exchange(request.dump());

  json reply;
  try {
    reply = json::parse(reply_line);
  } catch (const json::exception&) {
    protocol_failure("reply is not JSON: " + reply_line.substr(0, 80));
  }
  if (!reply.is_object()) protocol_failure("reply is not an object");
  if (!reply.contains("id") || !reply["id"].is_number_unsigned() ||
      reply["id"].get<std::uint64_t>() != id) {
    protocol_failure("reply id does not match request " + std::to_string(id));
  }
  if (!reply.contains("ok") || !reply["ok"].is_boolean()) protocol_failure("reply lacks ok flag");
  if (!reply["ok"].get<bool>()) {
    const std::string code = reply.value("code", std::string("unknown"));
    const std::string message = reply.value("message", std::string());
    throw Error(ErrorCode::kProtocol, "bridge rejected '" + op + "' (" + code + "): " + message);
  }
  return Reply{std::move(reply)};
}

namespace {

template <typename T>
T required(const json& body, const char* field) {
  if (!body.contains(field)) protocol_failure(std::string("reply lacks '") + field + "'");
  try {
    return body[field].get<T>();
  } catch (const json::exception&) {
    protocol_failure(std::string("reply field '") + field + "' has the wrong type");
  }
}

std::vector<TokenId> id_array(const json& body, const char* field) {
  if (!body.contains(field) || !body[field].is_array()) {
    protocol_failure(std::string("reply lacks array '") + field + "'");
  }
  std::vector<TokenId> ids;
  ids.reserve(body[field].size());
  for (const json& v : body[field]) {
    if (!v.is_number_unsigned()) protocol_failure("non-integer token id");
    ids.push_back(v.get<TokenId>());
  }
  return ids;
}

}  // namespace

BridgeConnection::BridgeConnection(std::unique_ptr<BridgeTransport> transport)
    : transport_(std::move(transport)) {
  const json body = call("hello", "").body;
  info_.protocol = required<std::string>(body, "protocol");
  if (info_.protocol != kBridgeProtocol) {
    protocol_failure("bridge speaks '" + info_.protocol + "', expected " + kBridgeProtocol);
  }
  info_.model = required<std::string>(body, "model");
  info_.vocab_size = required<std::uint32_t>(body, "vocab");
  info_.eos_id = required<TokenId>(body, "eos");
  info_.max_context = required<std::uint32_t>(body, "max_context");
  if (info_.vocab_size < 2 || info_.vocab_size > kFrequencyTotal) {
    protocol_failure("vocabulary size out of range");
  }
  if (info_.eos_id >= info_.vocab_size) protocol_failure("eos id outside vocabulary");
  if (info_.max_context < 1) protocol_failure("max_context must be positive");
}

QuantizedDistribution BridgeConnection::distribution(std::span<const TokenId> context) {
  json payload;
  payload["ctx"] = std::vector<TokenId>(context.begin(), context.end());
  const json body = call("dist", payload.dump()).body;
  if (!body.contains("freqs") || !body["freqs"].is_array()) protocol_failure("reply lacks freqs");
  const json& arr = body["freqs"];
  if (arr.size() != info_.vocab_size) {
    protocol_failure("freqs has " + std::to_string(arr.size()) + " entries, vocabulary is " +
                     std::to_string(info_.vocab_size));
  }
  std::vector<std::uint32_t> freqs;
  freqs.reserve(arr.size());
  std::uint64_t sum = 0;
  for (const json& v : arr) {
    if (!v.is_number_unsigned()) protocol_failure("non-integer frequency");
    const auto f = v.get<std::uint64_t>();
    if (f == 0) protocol_failure("zero frequency");
    if (f > kFrequencyTotal) protocol_failure("frequency exceeds 2^16");
    sum += f;
    freqs.push_back(static_cast<std::uint32_t>(f));
  }
  if (sum != kFrequencyTotal) {
    protocol_failure("frequencies sum to " + std::to_string(sum) + ", expected 65536");
  }
  return QuantizedDistribution(std::move(freqs));
}

BridgeTokens BridgeConnection::tokenize(const std::string& text) {
  json payload;
  payload["text"] = text;
  std::string encoded;
  try {
    encoded = payload.dump();
  } catch (const json::type_error&) {
    throw Error(ErrorCode::kTokenizerLossy, "text is not valid UTF-8 and cannot be sent to the bridge");
  }
  const json body = call("tok", encoded).body;
  BridgeTokens out;
  out.ids = id_array(body, "ids");
  out.lossy = body.value("lossy", false);
  return out;
}

std::string BridgeConnection::detokenize(std::span<const TokenId> ids) {
  json payload;
  payload["ids"] = std::vector<TokenId>(ids.begin(), ids.end());
  return required<std::string>(call("detok", payload.dump()).body, "text");
}

std::shared_ptr<BridgeConnection> connect_bridge(const std::string& endpoint) {
  constexpr std::string_view kReplay = "replay:";
  if (endpoint.rfind(kReplay, 0) == 0) {
    return std::make_shared<BridgeConnection>(
        std::make_unique<ReplayTransport>(endpoint.substr(kReplay.size())));
  }
  if (endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "empty bridge endpoint");
  return std::make_shared<BridgeConnection>(std::make_unique<ProcessTransport>(endpoint));
}

// ---------------------------------------------------------------------------
// Model and tokenizer

BridgeModel::BridgeModel(std::shared_ptr<BridgeConnection> connection)
    : connection_(std::move(connection)), vocab_(connection_->vocabulary()) {}

const QuantizedDistribution& BridgeModel::next_distribution(const ModelContext& ctx) {
  dist_ = connection_->distribution(ctx.tail(connection_->info().max_context));
  return dist_;
}

std::unique_ptr<ProbabilityModel> BridgeModel::fresh() const {
  return std::make_unique<BridgeModel>(connection_);
}

std::unique_ptr<ProbabilityModel> make_bridge_model(std::shared_ptr<BridgeConnection> connection,
                                                    const Vocabulary& expected_vocab) {
  if (!(connection->vocabulary() == expected_vocab)) {
    throw Error(ErrorCode::kProtocol,
                "bridge vocabulary (" + std::to_string(connection->info().vocab_size) +
                    ") does not match the expected vocabulary (" +
                    std::to_string(expected_vocab.size()) + ")");
  }
  return std::make_unique<BridgeModel>(std::move(connection));
}

TokenStream bridge_tokenize(BridgeConnection& connection, const std::string& text) {
  BridgeTokens tokens = connection.tokenize(text);
  if (tokens.lossy) {
    throw Error(ErrorCode::kTokenizerLossy, "bridge tokenizer cannot reproduce the text");
  }
  try {
    return TokenStream(std::move(tokens.ids), connection.vocabulary(), TokenizerId::kBridge);
  } catch (const Error& e) {
    protocol_failure(std::string("tokenize reply: ") + e.what());
  }
}

std::string bridge_detokenize(BridgeConnection& connection, const TokenStream& tokens) {
  if (tokens.tokenizer() != TokenizerId::kBridge) {
    throw Error(ErrorCode::kInvalidArgument, "not a bridge-native token stream");
  }
  return connection.detokenize(tokens.ids());
}

BridgeTokenizer::BridgeTokenizer(std::shared_ptr<BridgeConnection> connection)
    : connection_(std::move(connection)), vocab_(connection_->vocabulary()) {}

TokenStream BridgeTokenizer::tokenize(const std::string& text) {
  return bridge_tokenize(*connection_, text);
}

std::string BridgeTokenizer::detokenize(const TokenStream& tokens) {
  return bridge_detokenize(*connection_, tokens);
}

}  // namespace lmac
