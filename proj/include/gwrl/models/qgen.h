#ifndef GWRL_MODELS_QGEN_H_
#define GWRL_MODELS_QGEN_H_

#include <span>
#include <vector>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tape.h"
#include "gwrl/models/layers.h"
#include "gwrl/scenes/dialogue.h"
#include "gwrl/scenes/vocabulary.h"

namespace gwrl::models {

using scenes::TokenId;

/// Token stream fed to the question generator. Step k consumes tokens[k] and
/// its output distribution scores tokens[k + 1] with weight weights[k + 1];
/// zero weight means the token is consumed but not predicted (answers,
/// forced <?>). tokens[0] is <start> and weights[0] is unused.
struct FlatSequence {
  std::vector<TokenId> tokens;
  std::vector<double> weights;

  std::size_t NumPredicted() const;
};

/// <start>, then each question (predicted) and its answer token (not
/// predicted). With `append_stop`, a final predicted <stop>.
FlatSequence QGenSequence(const scenes::Dialogue& dialogue, const scenes::Vocabulary& vocab,
                          bool append_stop);

/// Recurrent question generator: embed(prev) ++ scene features -> LSTM ->
/// logits over the vocabulary. Tokens outside `policy_mask` (when given) get
/// probability zero.
class QGen {
 public:
  QGen(std::size_t vocab_size, const ModelSizes& sizes, std::uint64_t seed,
       ad::Mask policy_mask = {});

  struct StepResult {
    std::vector<double> log_probs;  // masked entries are -inf
    std::vector<double> probs;
    LstmState state;
  };

  LstmState InitialState() const { return LstmState::Zeros(lstm_.hidden_dim()); }
  StepResult Step(TokenId prev, std::span<const double> scene_features,
                  const LstmState& state) const;
  /// Consumes a token without computing the output distribution.
  void Advance(TokenId prev, std::span<const double> scene_features,
               LstmState& state) const;
  /// Output distribution for the current state.
  void Distribution(const LstmState& state, std::vector<double>& log_probs,
                    std::vector<double>& probs) const;

  /// sum_k weights[k+1] * log p(tokens[k+1] | tokens[0..k]).
  ad::Var LogLikelihood(ad::Tape& tape, const FlatSequence& seq,
                        std::span<const double> scene_features) const;
  /// Negative log-likelihood of the predicted tokens. Throws
  /// std::invalid_argument if nothing is predicted.
  ad::Var Nll(ad::Tape& tape, const FlatSequence& seq,
              std::span<const double> scene_features) const;
  /// Tape-free NLL, same value.
  double NllValue(const FlatSequence& seq, std::span<const double> scene_features) const;

  const ad::ParamStore& params() const { return params_; }
  ad::ParamStore& mutable_params() { return params_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t hidden_dim() const { return lstm_.hidden_dim(); }
  std::size_t feature_dim() const { return feature_dim_; }
  const ad::Mask& mask() const { return mask_; }

 private:
  void CheckToken(TokenId token) const;
  void CheckFeatures(std::span<const double> features) const;
  void StepInput(TokenId prev, std::span<const double> features,
                 std::vector<double>& x) const;

  std::size_t vocab_size_;
  std::size_t word_dim_;
  std::size_t feature_dim_;
  ad::Mask mask_;
  ad::ParamStore params_;
  std::size_t emb_ = 0;
  LstmLayer lstm_;
  std::size_t out_w_ = 0, out_b_ = 0;
};

}  // namespace gwrl::models

#endif  // GWRL_MODELS_QGEN_H_
