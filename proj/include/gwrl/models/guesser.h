#ifndef GWRL_MODELS_GUESSER_H_
#define GWRL_MODELS_GUESSER_H_

#include <span>
#include <vector>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tape.h"
#include "gwrl/models/layers.h"
#include "gwrl/scenes/scene.h"
#include "gwrl/scenes/vocabulary.h"

namespace gwrl::models {

using scenes::TokenId;

struct ObjectFeatures {
  int category = 1;
  scenes::Spatial spatial{};
};

std::vector<ObjectFeatures> ObjectFeaturesOf(const scenes::Game& game);

/// Scores each object by the dot product of the dialogue LSTM's final hidden
/// state with an MLP embedding of (category embedding, spatial 8-vector). The
/// MLP is shared across objects. An empty dialogue leaves the hidden state at
/// zero, so every object scores 0.
class Guesser {
 public:
  Guesser(std::size_t vocab_size, int num_categories, const ModelSizes& sizes,
          std::uint64_t seed);

  /// `dialogue` is the flat token stream (questions with <?>, answer tokens).
  std::vector<double> Forward(std::span<const TokenId> dialogue,
                              std::span<const ObjectFeatures> objects) const;
  /// Argmax object, lowest index on ties.
  std::size_t Guess(std::span<const TokenId> dialogue,
                    std::span<const ObjectFeatures> objects) const;

  ad::Var Scores(ad::Tape& tape, std::span<const TokenId> dialogue,
                 std::span<const ObjectFeatures> objects) const;
  ad::Var Loss(ad::Tape& tape, std::span<const TokenId> dialogue,
               std::span<const ObjectFeatures> objects, std::size_t target) const;

  const ad::ParamStore& params() const { return params_; }
  ad::ParamStore& mutable_params() { return params_; }

 private:
  void Check(std::span<const TokenId> dialogue,
             std::span<const ObjectFeatures> objects) const;

  std::size_t vocab_size_;
  int num_categories_;
  std::size_t word_dim_;
  ad::ParamStore params_;
  std::size_t emb_ = 0, cat_emb_ = 0;
  LstmLayer lstm_;
  Mlp obj_mlp_;
};

}  // namespace gwrl::models

#endif  // GWRL_MODELS_GUESSER_H_
