#ifndef GWRL_DECODE_DECODE_H_
#define GWRL_DECODE_DECODE_H_

#include <span>
#include <string>
#include <vector>

#include "gwrl/models/qgen.h"
#include "gwrl/util/rng.h"

namespace gwrl::decode {

using scenes::TokenId;

enum class Decoder { kSampling, kGreedy, kBeam };

std::string DecoderName(Decoder d);  // "sampling" | "greedy" | "beam"
/// Accepts "sampling" (or "sample"), "greedy", "beam" (or "bsearch").
Decoder ParseDecoder(const std::string& name);

/// Inverse-CDF draw with one uniform. Throws std::invalid_argument if the
/// entries are negative, non-finite, or do not sum to 1 within 1e-9.
TokenId SampleToken(std::span<const double> probs, Rng& rng);

/// Argmax, lowest index on ties.
TokenId GreedyToken(std::span<const double> probs);

struct BeamOptions {
  int width = 3;
  int max_words = 12;
  bool length_normalize = true;
};

struct BeamResult {
  /// Policy tokens of the question: words, then <?> or <stop> unless the word
  /// cap ended it.
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  /// log_prob / tokens.size() when normalising, else log_prob.
  double score = 0.0;
};

/// Beam search over one question. `state` is the generator state before
/// consuming `prev`. Each round pools the expansions of every live hypothesis
/// and keeps the `width` best by cumulative log-probability (ties: earlier
/// parent, then lower token). A hypothesis finishes on <?>, on <stop>, or when
/// its word count reaches `max_words`; the best finished one by score wins.
BeamResult BeamSearchQuestion(const models::QGen& qgen,
                              std::span<const double> scene_features,
                              const models::LstmState& state, TokenId prev,
                              const BeamOptions& options, TokenId question_mark,
                              TokenId stop);

}  // namespace gwrl::decode

#endif  // GWRL_DECODE_DECODE_H_
