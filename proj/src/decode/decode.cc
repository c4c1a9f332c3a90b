#include "gwrl/decode/decode.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwrl::decode {

std::string DecoderName(Decoder d) {
  switch (d) {
    case Decoder::kSampling:
      return "sampling";
    case Decoder::kGreedy:
      return "greedy";
    case Decoder::kBeam:
      return "beam";
  }
  return "sampling";
}

Decoder ParseDecoder(const std::string& name) {
  if (name == "sampling" || name == "sample") return Decoder::kSampling;
  if (name == "greedy") return Decoder::kGreedy;
  if (name == "beam" || name == "bsearch") return Decoder::kBeam;
  throw std::invalid_argument("unknown decoder \"" + name +
                              "\" (expected sampling, greedy or beam)");
}

TokenId SampleToken(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("distribution has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("distribution sums to " + std::to_string(total) +
                                ", not 1");
  }
  const double u = rng.Uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return static_cast<TokenId>(i);
  }
  // Rounding left u above the final cumulative sum.
  return static_cast<TokenId>(last_positive);
}

TokenId GreedyToken(std::span<const double> probs) {
  return static_cast<TokenId>(models::ArgMax(probs));
}

namespace {

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  models::LstmState state;  // after consuming the hypothesis' last input
  int words = 0;
};

struct Candidate {
  double log_prob;
  std::size_t parent;
  TokenId token;
};

}  // namespace

BeamResult BeamSearchQuestion(const models::QGen& qgen,
                              std::span<const double> scene_features,
                              const models::LstmState& state, TokenId prev,
                              const BeamOptions& options, TokenId question_mark,
                              TokenId stop) {
  if (options.width < 1) throw std::invalid_argument("beam width must be >= 1");
  if (options.max_words < 1) throw std::invalid_argument("max_words must be >= 1");
  const auto score_of = [&](double log_prob, std::size_t length) {
    return options.length_normalize ? log_prob / static_cast<double>(length) : log_prob;
  };

  Hypothesis root;
  root.state = state;
  qgen.Advance(prev, scene_features, root.state);
  std::vector<Hypothesis> live = {std::move(root)};

  bool have_best = false;
  BeamResult best;
  std::vector<double> log_probs, probs;
  std::vector<Candidate> pool;
  while (!live.empty()) {
    pool.clear();
    for (std::size_t p = 0; p < live.size(); ++p) {
      qgen.Distribution(live[p].state, log_probs, probs);
      for (std::size_t tok = 0; tok < log_probs.size(); ++tok) {
        if (probs[tok] <= 0.0) continue;
        pool.push_back({live[p].log_prob + log_probs[tok], p, static_cast<TokenId>(tok)});
      }
    }
    const std::size_t keep = std::min(pool.size(), static_cast<std::size_t>(options.width));
    std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& cand = pool[i];
      const Hypothesis& parent = live[cand.parent];
      std::vector<TokenId> tokens = parent.tokens;
      tokens.push_back(cand.token);
      const bool is_word = cand.token != question_mark && cand.token != stop;
      const int words = parent.words + (is_word ? 1 : 0);
      if (!is_word || words >= options.max_words) {
        const double score = score_of(cand.log_prob, tokens.size());
        // Strict comparison keeps the earliest-ranked hypothesis on ties.
        if (!have_best || score > best.score) {
          best = {std::move(tokens), cand.log_prob, score};
          have_best = true;
        }
        continue;
      }
      Hypothesis h;
      h.tokens = std::move(tokens);
      h.log_prob = cand.log_prob;
      h.words = words;
      h.state = parent.state;
      qgen.Advance(cand.token, scene_features, h.state);
      next.push_back(std::move(h));
    }
    live = std::move(next);
  }
  if (!have_best) throw std::logic_error("beam search finished no hypothesis");
  return best;
}

}  // namespace gwrl::decode
