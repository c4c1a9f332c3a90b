#include "gwrl/models/oracle.h"

#include <stdexcept>

namespace gwrl::models {

Oracle::Oracle(std::size_t vocab_size, int num_categories, const ModelSizes& sizes,
               std::uint64_t seed)
    : vocab_size_(vocab_size),
      num_categories_(num_categories),
      word_dim_(sizes.word_dim),
      params_(seed) {
  const std::size_t hidden = sizes.hidden;
  const std::size_t cat_dim = sizes.category_dim;
  params_.AddUniform("oracle.word_emb", {vocab_size, word_dim_},
                     kEmbeddingInitBound);
  emb_ = params_.IndexOf("oracle.word_emb");
  lstm_ = LstmLayer(params_, "oracle.lstm", word_dim_, hidden);
  params_.AddUniform("oracle.cat_emb", {static_cast<std::size_t>(num_categories), cat_dim},
                     kEmbeddingInitBound);
  cat_emb_ = params_.IndexOf("oracle.cat_emb");
  mlp_ = Mlp(params_, "oracle.mlp", hidden + cat_dim + 8, sizes.mlp_hidden, 3);
}

void Oracle::Check(std::span<const TokenId> question, int category) const {
  if (question.empty()) throw std::invalid_argument("oracle: empty question");
  if (category < 1 || category > num_categories_) {
    throw std::out_of_range("oracle: category " + std::to_string(category) +
                            " outside 1.." + std::to_string(num_categories_));
  }
  for (TokenId t : question) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
      throw std::out_of_range("unknown token index " + std::to_string(t));
    }
  }
}

std::array<double, 3> Oracle::Forward(std::span<const TokenId> question, int category,
                                      const scenes::Spatial& spatial) const {
  Check(question, category);
  LstmState state = LstmState::Zeros(lstm_.hidden_dim());
  const ad::Tensor& emb = params_.value(emb_);
  for (TokenId t : question) {
    lstm_.Step(params_, std::span<const double>(emb.data() + t * word_dim_, word_dim_),
               state);
  }
  const ad::Tensor& cat = params_.value(cat_emb_);
  const std::size_t cat_dim = cat.dim(1);
  std::vector<double> x = state.h;
  x.insert(x.end(), cat.data() + (category - 1) * cat_dim,
           cat.data() + category * cat_dim);
  x.insert(x.end(), spatial.begin(), spatial.end());
  const auto probs = ad::Softmax(mlp_.Forward(params_, x));
  return {probs[0], probs[1], probs[2]};
}

scenes::Answer Oracle::Answer(std::span<const TokenId> question, int category,
                              const scenes::Spatial& spatial) const {
  const auto probs = Forward(question, category, spatial);
  return static_cast<scenes::Answer>(ArgMax(probs));
}

ad::Var Oracle::Logits(ad::Tape& tape, std::span<const TokenId> question, int category,
                       const scenes::Spatial& spatial) const {
  Check(question, category);
  const ad::Var zeros = tape.Constant(ad::Tensor({lstm_.hidden_dim()}));
  const ad::Var emb = tape.Param(params_, emb_);
  ad::Var h = zeros, c = zeros;
  for (TokenId t : question) {
    const auto next = lstm_.Step(tape, params_, ad::Embedding(emb, t), h, c);
    h = next.h;
    c = next.c;
  }
  const ad::Var cat = ad::Embedding(tape.Param(params_, cat_emb_), category - 1);
  const ad::Var where = tape.Constant(
      ad::Tensor::Vector(std::vector<double>(spatial.begin(), spatial.end())));
  return mlp_.Forward(tape, params_, ad::Concat({h, cat, where}));
}

ad::Var Oracle::Loss(ad::Tape& tape, std::span<const TokenId> question, int category,
                     const scenes::Spatial& spatial, scenes::Answer answer) const {
  return ad::CrossEntropy(Logits(tape, question, category, spatial),
                          static_cast<std::size_t>(answer));
}

}  // namespace gwrl::models
