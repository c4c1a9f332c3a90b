#ifndef GWRL_MODELS_ORACLE_H_
#define GWRL_MODELS_ORACLE_H_

#include <array>
#include <span>
#include <vector>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tape.h"
#include "gwrl/models/layers.h"
#include "gwrl/scenes/scene.h"
#include "gwrl/scenes/vocabulary.h"

namespace gwrl::models {

using scenes::TokenId;

/// Answers a question about one object: LSTM over the question tokens, its
/// final hidden state concatenated with the category embedding and the
/// spatial 8-vector, then an MLP to (yes, no, na) logits.
class Oracle {
 public:
  Oracle(std::size_t vocab_size, int num_categories, const ModelSizes& sizes,
         std::uint64_t seed);

  std::array<double, 3> Forward(std::span<const TokenId> question, int category,
                                const scenes::Spatial& spatial) const;
  /// Argmax answer, lowest index on ties.
  scenes::Answer Answer(std::span<const TokenId> question, int category,
                        const scenes::Spatial& spatial) const;

  ad::Var Logits(ad::Tape& tape, std::span<const TokenId> question, int category,
                 const scenes::Spatial& spatial) const;
  ad::Var Loss(ad::Tape& tape, std::span<const TokenId> question, int category,
               const scenes::Spatial& spatial, scenes::Answer answer) const;

  const ad::ParamStore& params() const { return params_; }
  ad::ParamStore& mutable_params() { return params_; }
  int num_categories() const { return num_categories_; }

 private:
  void Check(std::span<const TokenId> question, int category) const;

  std::size_t vocab_size_;
  int num_categories_;
  std::size_t word_dim_;
  ad::ParamStore params_;
  std::size_t emb_ = 0, cat_emb_ = 0;
  LstmLayer lstm_;
  Mlp mlp_;
};

}  // namespace gwrl::models

#endif  // GWRL_MODELS_ORACLE_H_
