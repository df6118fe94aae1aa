#include "lmac/arith_coder.hpp"

#include <string>

#include "lmac/error.hpp"

namespace lmac {

namespace {

void check_token(const QuantizedDistribution& dist, TokenId token) {
  if (token >= dist.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "token " + std::to_string(token) + " outside distribution of size " +
                    std::to_string(dist.size()));
  }
}

// Narrows [low, high] to the slot [F, F + P) of T.
void narrow(CoderState& s, std::uint64_t cum, std::uint64_t freq, std::uint64_t total) {
  const std::uint64_t low = s.low;
  const std::uint64_t range = s.range();
  s.high = static_cast<std::uint32_t>(low + range * (cum + freq) / total - 1);
  s.low = static_cast<std::uint32_t>(low + range * cum / total);
}

}  // namespace

void ArithmeticEncoder::emit(bool bit) {
  out_.push_back(bit);
  out_.append_run(!bit, state_.pending_bits);
  state_.pending_bits = 0;
}

std::size_t ArithmeticEncoder::encode(const QuantizedDistribution& dist, TokenId token) {
  if (finished_) throw Error(ErrorCode::kInvalidArgument, "encoder already finished");
  check_token(dist, token);
  const std::size_t before = out_.size();
  narrow(state_, dist.cumulative(token), dist.freq(token), dist.total());

  for (;;) {
    std::uint64_t low = state_.low;
    std::uint64_t high = state_.high;
    if (high < kHalf) {
      emit(false);
    } else if (low >= kHalf) {
      emit(true);
      low -= kHalf;
      high -= kHalf;
    } else if (low >= kQuarter && high < kThreeQuarters) {
      ++state_.pending_bits;
      low -= kQuarter;
      high -= kQuarter;
    } else {
      break;
    }
    state_.low = static_cast<std::uint32_t>(low << 1);
    state_.high = static_cast<std::uint32_t>((high << 1) | 1);
  }
  return out_.size() - before;
}

BitString ArithmeticEncoder::finish() {
  if (finished_) throw Error(ErrorCode::kInvalidArgument, "encoder already finished");
  finished_ = true;
  // Two bits pick a point inside the current interval: 01 (= 1/4) when the
  // interval reaches below the first quarter, else 10 (= 1/2). Readers pad
  // with zeros, so that point is what the decoder sees.
  ++state_.pending_bits;
  emit(state_.low >= kQuarter);
  return out_;
}

ArithmeticDecoder::ArithmeticDecoder(BitReader& reader) : reader_(reader) {
  for (unsigned i = 0; i < kRegisterBits; ++i) {
    value_ = (value_ << 1) | static_cast<std::uint32_t>(reader_.read_bit());
  }
}

TokenId ArithmeticDecoder::decode(const QuantizedDistribution& dist) {
  if (value_ < state_.low || value_ > state_.high) {
    throw Error(ErrorCode::kCorruptStream, "decoder value outside coding interval");
  }
  const std::uint64_t range = state_.range();
  const std::uint64_t offset = std::uint64_t{value_} - state_.low;
  const std::uint64_t target = ((offset + 1) * dist.total() - 1) / range;
  const TokenId token = dist.find(static_cast<std::uint32_t>(target));
  narrow(state_, dist.cumulative(token), dist.freq(token), dist.total());

  for (;;) {
    std::uint64_t low = state_.low;
    std::uint64_t high = state_.high;
    std::uint64_t value = value_;
    if (high < kHalf) {
      // nothing to subtract
    } else if (low >= kHalf) {
      low -= kHalf;
      high -= kHalf;
      value -= kHalf;
    } else if (low >= kQuarter && high < kThreeQuarters) {
      low -= kQuarter;
      high -= kQuarter;
      value -= kQuarter;
    } else {
      break;
    }
    state_.low = static_cast<std::uint32_t>(low << 1);
    state_.high = static_cast<std::uint32_t>((high << 1) | 1);
    value_ = static_cast<std::uint32_t>((value << 1) | static_cast<std::uint64_t>(reader_.read_bit()));
  }
  return token;
}

namespace {

const QuantizedDistribution& checked_distribution(ProbabilityModel& model,
                                                  const ModelContext& ctx) {
  const QuantizedDistribution& dist = model.next_distribution(ctx);
  if (dist.size() != model.vocabulary().size()) {
    throw Error(ErrorCode::kModelContract,
                "model '" + model.id() + "' returned " + std::to_string(dist.size()) +
                    " frequencies for a vocabulary of " +
                    std::to_string(model.vocabulary().size()));
  }
  if (dist.total() != kFrequencyTotal) {
    throw Error(ErrorCode::kModelContract, "model '" + model.id() + "' total is not 2^16");
  }
  return dist;
}

}  // namespace

BitString encode_stream(ProbabilityModel& model, const TokenStream& tokens,
                        const CodingObserver& observer) {
  const Vocabulary& vocab = model.vocabulary();
  if (!(tokens.vocabulary() == vocab)) {
    throw Error(ErrorCode::kModelContract, "token stream vocabulary differs from the model's");
  }
  ModelContext ctx(vocab);
  ArithmeticEncoder encoder;
  auto code = [&](TokenId t) {
    const QuantizedDistribution& dist = checked_distribution(model, ctx);
    if (observer) observer(dist, t);
    encoder.encode(dist, t);
    ctx.push(t);
  };
  for (TokenId t : tokens.ids()) code(t);
  code(vocab.eos_id());
  return encoder.finish();
}

TokenStream decode_stream(ProbabilityModel& model, const BitString& bits, TokenizerId tokenizer,
                          std::size_t max_tokens) {
  const Vocabulary& vocab = model.vocabulary();
  BitReader reader(bits);
  ArithmeticDecoder decoder(reader);
  ModelContext ctx(vocab);
  std::vector<TokenId> out;
  for (;;) {
    const TokenId t = decoder.decode(checked_distribution(model, ctx));
    if (t == vocab.eos_id()) break;
    if (out.size() >= max_tokens) {
      throw Error(ErrorCode::kCorruptStream, "stream decodes to more tokens than expected");
    }
    out.push_back(t);
    ctx.push(t);
  }
  return TokenStream(std::move(out), vocab, tokenizer);
}

}  // namespace lmac
