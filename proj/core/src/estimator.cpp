#include "lmac/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "lmac/error.hpp"

namespace lmac {

NllReport nll_bits(ProbabilityModel& model, const TokenStream& tokens) {
  const Vocabulary& vocab = model.vocabulary();
  if (!(tokens.vocabulary() == vocab)) {
    throw Error(ErrorCode::kModelContract, "token stream vocabulary differs from the model's");
  }
  NllReport report;
  report.token_ids.reserve(tokens.size() + 1);
  report.per_token_bits.reserve(tokens.size() + 1);

  ModelContext ctx(vocab);
  auto account = [&](TokenId t) {
    const QuantizedDistribution& dist = model.next_distribution(ctx);
    if (dist.size() != vocab.size() || dist.total() != kFrequencyTotal) {
      throw Error(ErrorCode::kModelContract, "model '" + model.id() + "' broke the distribution contract");
    }
    const double bits = -std::log2(static_cast<double>(dist.freq(t)) / dist.total());
    report.token_ids.push_back(t);
    report.per_token_bits.push_back(bits);
    report.total_bits += bits;
    report.raw_total_bits += -std::log2(model.raw_probability(t));
    ctx.push(t);
  };
  for (TokenId t : tokens.ids()) account(t);
  account(vocab.eos_id());
  return report;
}

void write_nll_report(std::ostream& out, const NllReport& report) {
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < report.per_token_bits.size(); ++i) {
    out << i << '\t' << report.token_ids[i] << '\t' << report.per_token_bits[i] << '\n';
  }
  out.precision(old_precision);
}

ReferenceDistribution::ReferenceDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty distribution");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities do not sum to 1");
  }
}

double cross_entropy(const ReferenceDistribution& q, const ReferenceDistribution& p) {
  if (q.size() != p.size()) {
    throw Error(ErrorCode::kInvalidArgument, "distributions differ in length");
  }
  double bits = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q.probs()[i];
    if (qi == 0.0) continue;  // 0 log 0 = 0
    const double pi = p.probs()[i];
    if (pi == 0.0) return kInfiniteBits;
    bits -= qi * std::log2(pi);
  }
  return bits;
}

double kl_divergence(const ReferenceDistribution& q, const ReferenceDistribution& p) {
  const double cross = cross_entropy(q, p);
  if (std::isinf(cross)) return kInfiniteBits;
  return cross - cross_entropy(q, q);
}

double estimate_ratio(ProbabilityModel& model, const std::string& text, Tokenizer& tokenizer) {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot estimate the ratio of empty text");
  const NllReport report = nll_bits(model, tokenizer.tokenize(text));
  const double ratio = 8.0 * static_cast<double>(text.size()) / report.total_bits;
  return std::min(ratio, kMaxReportedRatio);
}

}  // namespace lmac
