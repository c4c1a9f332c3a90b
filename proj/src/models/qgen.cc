#include "gwrl/models/qgen.h"

#include <stdexcept>

namespace gwrl::models {

std::size_t FlatSequence::NumPredicted() const {
  std::size_t n = 0;
  for (std::size_t k = 1; k < weights.size(); ++k) n += weights[k] != 0.0;
  return n;
}

FlatSequence QGenSequence(const scenes::Dialogue& dialogue,
                          const scenes::Vocabulary& vocab, bool append_stop) {
  FlatSequence seq;
  seq.tokens.push_back(vocab.start());
  seq.weights.push_back(0.0);
  for (const auto& pair : dialogue.pairs) {
    for (TokenId t : pair.question) {
      seq.tokens.push_back(t);
      seq.weights.push_back(1.0);
    }
    seq.tokens.push_back(vocab.AnswerToken(pair.answer));
    seq.weights.push_back(0.0);
  }
  if (append_stop) {
    seq.tokens.push_back(vocab.stop());
    seq.weights.push_back(1.0);
  }
  return seq;
}

QGen::QGen(std::size_t vocab_size, const ModelSizes& sizes, std::uint64_t seed,
           ad::Mask policy_mask)
    : vocab_size_(vocab_size),
      word_dim_(sizes.word_dim),
      feature_dim_(sizes.feature_dim),
      mask_(std::move(policy_mask)),
      params_(seed) {
  if (!mask_.empty() && mask_.size() != vocab_size) {
    throw ad::ShapeError("policy mask has " + std::to_string(mask_.size()) +
                         " entries for a vocabulary of " + std::to_string(vocab_size));
  }
  const std::size_t hidden = sizes.hidden;
  params_.AddUniform("qgen.word_emb", {vocab_size, word_dim_},
                     kEmbeddingInitBound);
  emb_ = params_.IndexOf("qgen.word_emb");
  lstm_ = LstmLayer(params_, "qgen.lstm", word_dim_ + feature_dim_, hidden);
  params_.Add("qgen.out.W", {hidden, vocab_size}, hidden);
  params_.Add("qgen.out.b", {vocab_size}, hidden);
  out_w_ = params_.IndexOf("qgen.out.W");
  out_b_ = params_.IndexOf("qgen.out.b");
}

void QGen::CheckToken(TokenId token) const {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_size_) {
    throw std::out_of_range("unknown token index " + std::to_string(token));
  }
}

void QGen::CheckFeatures(std::span<const double> features) const {
  if (features.size() != feature_dim_) {
    throw ad::ShapeError("scene features have " + std::to_string(features.size()) +
                         " entries, qgen expects " + std::to_string(feature_dim_));
  }
}

void QGen::StepInput(TokenId prev, std::span<const double> features,
                     std::vector<double>& x) const {
  CheckToken(prev);
  CheckFeatures(features);
  const double* row = params_.value(emb_).data() + prev * word_dim_;
  x.assign(row, row + word_dim_);
  x.insert(x.end(), features.begin(), features.end());
}

void QGen::Advance(TokenId prev, std::span<const double> scene_features,
                   LstmState& state) const {
  thread_local std::vector<double> x;
  StepInput(prev, scene_features, x);
  lstm_.Step(params_, x, state);
}

void QGen::Distribution(const LstmState& state, std::vector<double>& log_probs,
                        std::vector<double>& probs) const {
  const auto logits = Affine(params_.value(out_w_), params_.value(out_b_), state.h);
  log_probs = ad::LogSoftmax(logits, mask_);
  probs = ad::Softmax(logits, mask_);
}

QGen::StepResult QGen::Step(TokenId prev, std::span<const double> scene_features,
                            const LstmState& state) const {
  StepResult r;
  r.state = state;
  Advance(prev, scene_features, r.state);
  Distribution(r.state, r.log_probs, r.probs);
  return r;
}

ad::Var QGen::LogLikelihood(ad::Tape& tape, const FlatSequence& seq,
                            std::span<const double> scene_features) const {
  if (seq.tokens.size() != seq.weights.size()) {
    throw std::invalid_argument("sequence tokens and weights differ in length");
  }
  CheckFeatures(scene_features);
  std::size_t last = 0;  // one past the last predicted position
  for (std::size_t k = 1; k < seq.weights.size(); ++k) {
    if (seq.weights[k] != 0.0) last = k;
  }
  const ad::Var features = tape.Constant(ad::Tensor::Vector(
      std::vector<double>(scene_features.begin(), scene_features.end())));
  const ad::Var zeros = tape.Constant(ad::Tensor({lstm_.hidden_dim()}));
  const ad::Var emb = tape.Param(params_, emb_);
  const ad::Var out_w = tape.Param(params_, out_w_);
  const ad::Var out_b = tape.Param(params_, out_b_);
  ad::Var h = zeros, c = zeros;
  ad::Var total;
  for (std::size_t k = 0; k < last; ++k) {
    CheckToken(seq.tokens[k]);
    const ad::Var x = ad::Concat({ad::Embedding(emb, seq.tokens[k]), features});
    const auto next = lstm_.Step(tape, params_, x, h, c);
    h = next.h;
    c = next.c;
    const double w = seq.weights[k + 1];
    if (w == 0.0) continue;
    CheckToken(seq.tokens[k + 1]);
    const ad::Var logits = ad::Add(ad::MatMul(h, out_w), out_b);
    const ad::Var term = ad::Scale(ad::CrossEntropy(logits, seq.tokens[k + 1], mask_), -w);
    total = total.valid() ? ad::Add(total, term) : term;
  }
  if (!total.valid()) total = tape.Constant(ad::Tensor::Scalar(0.0));
  return total;
}

ad::Var QGen::Nll(ad::Tape& tape, const FlatSequence& seq,
                  std::span<const double> scene_features) const {
  if (seq.NumPredicted() == 0) throw std::invalid_argument("empty dialogue");
  return ad::Scale(LogLikelihood(tape, seq, scene_features), -1.0);
}

double QGen::NllValue(const FlatSequence& seq,
                      std::span<const double> scene_features) const {
  if (seq.NumPredicted() == 0) throw std::invalid_argument("empty dialogue");
  if (seq.tokens.size() != seq.weights.size()) {
    throw std::invalid_argument("sequence tokens and weights differ in length");
  }
  LstmState state = InitialState();
  std::vector<double> log_probs, probs;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < seq.tokens.size(); ++k) {
    Advance(seq.tokens[k], scene_features, state);
    const double w = seq.weights[k + 1];
    if (w == 0.0) continue;
    CheckToken(seq.tokens[k + 1]);
    Distribution(state, log_probs, probs);
    total -= w * log_probs[seq.tokens[k + 1]];
  }
  return total;
}

}  // namespace gwrl::models
