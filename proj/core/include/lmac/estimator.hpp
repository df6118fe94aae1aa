#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lmac/model.hpp"
#include "lmac/tokenize.hpp"

namespace lmac {

/// Code length of a stream as cumulative -log2 of the quantized
/// probabilities the coder would use, terminal EOS included.
struct NllReport {
  std::vector<TokenId> token_ids;      // coded symbols, EOS last
  std::vector<double> per_token_bits;
  double total_bits = 0.0;
  /// Same sum over the model's pre-quantization probabilities.
  double raw_total_bits = 0.0;

  std::size_t token_count() const { return per_token_bits.size(); }
};

/// Runs the model along the stream exactly as encode_stream does, without
/// coding anything.
NllReport nll_bits(ProbabilityModel& model, const TokenStream& tokens);

/// Tab-separated "index, token id, bits" lines.
void write_nll_report(std::ostream& out, const NllReport& report);

/// A probability vector: entries >= 0 summing to 1 within 1e-9.
class ReferenceDistribution {
 public:
  explicit ReferenceDistribution(std::vector<double> probs);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

inline constexpr double kInfiniteBits = std::numeric_limits<double>::infinity();

/// H(Q,P) = -sum q_i log2 p_i in bits. Returns kInfiniteBits when some
/// p_i = 0 has q_i > 0.
double cross_entropy(const ReferenceDistribution& q, const ReferenceDistribution& p);

/// D_KL(Q||P) = H(Q,P) - H(Q,Q), computed literally as that difference.
double kl_divergence(const ReferenceDistribution& q, const ReferenceDistribution& p);

inline constexpr double kMaxReportedRatio = 1e4;

/// 8 * text bytes over the stream's estimated code length, capped at
/// kMaxReportedRatio. Throws kInvalidArgument on empty text.
double estimate_ratio(ProbabilityModel& model, const std::string& text, Tokenizer& tokenizer);

}  // namespace lmac
