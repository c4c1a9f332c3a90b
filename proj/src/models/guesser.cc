#include "gwrl/models/guesser.h"

#include <stdexcept>

namespace gwrl::models {

std::vector<ObjectFeatures> ObjectFeaturesOf(const scenes::Game& game) {
  std::vector<ObjectFeatures> out;
  out.reserve(game.objects.size());
  for (const auto& o : game.objects) {
    out.push_back({o.category, scenes::SpatialFeatures(o.bbox, game.width, game.height)});
  }
  return out;
}

Guesser::Guesser(std::size_t vocab_size, int num_categories, const ModelSizes& sizes,
                 std::uint64_t seed)
    : vocab_size_(vocab_size),
      num_categories_(num_categories),
      word_dim_(sizes.word_dim),
      params_(seed) {
  const std::size_t hidden = sizes.hidden;
  const std::size_t cat_dim = sizes.category_dim;
  params_.AddUniform("guesser.word_emb", {vocab_size, word_dim_},
                     kEmbeddingInitBound);
  emb_ = params_.IndexOf("guesser.word_emb");
  lstm_ = LstmLayer(params_, "guesser.lstm", word_dim_, hidden);
  params_.AddUniform("guesser.cat_emb", {static_cast<std::size_t>(num_categories), cat_dim},
                     kEmbeddingInitBound);
  cat_emb_ = params_.IndexOf("guesser.cat_emb");
  obj_mlp_ = Mlp(params_, "guesser.obj", cat_dim + 8, sizes.mlp_hidden, hidden);
}

void Guesser::Check(std::span<const TokenId> dialogue,
                    std::span<const ObjectFeatures> objects) const {
  if (objects.empty()) throw std::invalid_argument("guesser: empty object list");
  for (const auto& o : objects) {
    if (o.category < 1 || o.category > num_categories_) {
      throw std::out_of_range("guesser: category " + std::to_string(o.category) +
                              " outside 1.." + std::to_string(num_categories_));
    }
  }
  for (TokenId t : dialogue) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
      throw std::out_of_range("unknown token index " + std::to_string(t));
    }
  }
}

std::vector<double> Guesser::Forward(std::span<const TokenId> dialogue,
                                     std::span<const ObjectFeatures> objects) const {
  Check(dialogue, objects);
  LstmState state = LstmState::Zeros(lstm_.hidden_dim());
  const ad::Tensor& emb = params_.value(emb_);
  for (TokenId t : dialogue) {
    lstm_.Step(params_, std::span<const double>(emb.data() + t * word_dim_, word_dim_),
               state);
  }
  const ad::Tensor& cat = params_.value(cat_emb_);
  const std::size_t cat_dim = cat.dim(1);
  std::vector<double> scores;
  scores.reserve(objects.size());
  std::vector<double> x;
  for (const auto& o : objects) {
    x.assign(cat.data() + (o.category - 1) * cat_dim, cat.data() + o.category * cat_dim);
    x.insert(x.end(), o.spatial.begin(), o.spatial.end());
    const auto e = obj_mlp_.Forward(params_, x);
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += state.h[i] * e[i];
    scores.push_back(s);
  }
  return ad::Softmax(scores);
}

std::size_t Guesser::Guess(std::span<const TokenId> dialogue,
                           std::span<const ObjectFeatures> objects) const {
  return ArgMax(Forward(dialogue, objects));
}

ad::Var Guesser::Scores(ad::Tape& tape, std::span<const TokenId> dialogue,
                        std::span<const ObjectFeatures> objects) const {
  Check(dialogue, objects);
  const ad::Var zeros = tape.Constant(ad::Tensor({lstm_.hidden_dim()}));
  const ad::Var emb = tape.Param(params_, emb_);
  ad::Var h = zeros, c = zeros;
  for (TokenId t : dialogue) {
    const auto next = lstm_.Step(tape, params_, ad::Embedding(emb, t), h, c);
    h = next.h;
    c = next.c;
  }
  const ad::Var cat = tape.Param(params_, cat_emb_);
  std::vector<ad::Var> scores;
  for (const auto& o : objects) {
    const ad::Var where = tape.Constant(
        ad::Tensor::Vector(std::vector<double>(o.spatial.begin(), o.spatial.end())));
    const ad::Var e =
        obj_mlp_.Forward(tape, params_, ad::Concat({ad::Embedding(cat, o.category - 1), where}));
    scores.push_back(ad::Dot(h, e));
  }
  return ad::Concat(scores);
}

ad::Var Guesser::Loss(ad::Tape& tape, std::span<const TokenId> dialogue,
                      std::span<const ObjectFeatures> objects, std::size_t target) const {
  if (target >= objects.size()) throw std::out_of_range("guesser: target out of range");
  return ad::CrossEntropy(Scores(tape, dialogue, objects), target);
}

}  // namespace gwrl::models
