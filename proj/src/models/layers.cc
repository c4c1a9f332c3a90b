#include "gwrl/models/layers.h"

#include <cmath>
#include <stdexcept>

#include "gwrl/autodiff/kernels.h"

namespace gwrl::models {

std::vector<std::string> ModelSizes::Validate() const {
  std::vector<std::string> errors;
  auto positive = [&](int v, const char* key) {
    if (v < 1) errors.push_back(std::string("model.") + key + " must be >= 1");
  };
  positive(word_dim, "word_dim");
  positive(category_dim, "category_dim");
  positive(hidden, "hidden");
  positive(feature_dim, "feature_dim");
  positive(mlp_hidden, "mlp_hidden");
  positive(baseline_hidden, "baseline_hidden");
  return errors;
}

LstmLayer::LstmLayer(ad::ParamStore& store, const std::string& prefix,
                     std::size_t input, std::size_t hidden)
    : input_(input), hidden_(hidden) {
  store.Add(prefix + ".W_x", {input, 4 * hidden}, input);
  store.Add(prefix + ".W_h", {hidden, 4 * hidden}, hidden);
  // Forget gate starts open.
  ad::Tensor& bias = store.Add(prefix + ".b", {4 * hidden}, hidden);
  for (std::size_t k = hidden; k < 2 * hidden; ++k) bias[k] += 1.0;
  w_x_ = store.IndexOf(prefix + ".W_x");
  w_h_ = store.IndexOf(prefix + ".W_h");
  b_ = store.IndexOf(prefix + ".b");
}

ad::LstmOutput LstmLayer::Step(ad::Tape& tape, const ad::ParamStore& store, ad::Var x,
                               ad::Var h, ad::Var c) const {
  return ad::LstmCell(x, h, c, tape.Param(store, w_x_), tape.Param(store, w_h_),
                      tape.Param(store, b_));
}

void LstmLayer::Step(const ad::ParamStore& store, std::span<const double> x,
                     LstmState& state) const {
  if (x.size() != input_) {
    throw ad::ShapeError("lstm input has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(input_));
  }
  thread_local std::vector<double> h_new, c_new;
  h_new.resize(hidden_);
  c_new.resize(hidden_);
  ad::kernels::LstmForward(x, state.h, state.c, store.value(w_x_), store.value(w_h_),
                           store.value(b_), h_new.data(), c_new.data(), nullptr);
  state.h.assign(h_new.begin(), h_new.end());
  state.c.assign(c_new.begin(), c_new.end());
}

Mlp::Mlp(ad::ParamStore& store, const std::string& prefix, std::size_t input,
         std::size_t hidden, std::size_t output)
    : input_(input), hidden_(hidden), output_(output) {
  store.Add(prefix + ".W1", {input, hidden}, input);
  store.Add(prefix + ".b1", {hidden}, input);
  store.Add(prefix + ".W2", {hidden, output}, hidden);
  store.Add(prefix + ".b2", {output}, hidden);
  w1_ = store.IndexOf(prefix + ".W1");
  b1_ = store.IndexOf(prefix + ".b1");
  w2_ = store.IndexOf(prefix + ".W2");
  b2_ = store.IndexOf(prefix + ".b2");
}

ad::Var Mlp::Forward(ad::Tape& tape, const ad::ParamStore& store, ad::Var x) const {
  ad::Var hidden = ad::Tanh(
      ad::Add(ad::MatMul(x, tape.Param(store, w1_)), tape.Param(store, b1_)));
  return ad::Add(ad::MatMul(hidden, tape.Param(store, w2_)), tape.Param(store, b2_));
}

std::vector<double> Mlp::Forward(const ad::ParamStore& store,
                                 std::span<const double> x) const {
  if (x.size() != input_) {
    throw ad::ShapeError("mlp input has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(input_));
  }
  std::vector<double> hidden = Affine(store.value(w1_), store.value(b1_), x);
  for (double& v : hidden) v = std::tanh(v);
  return Affine(store.value(w2_), store.value(b2_), hidden);
}

std::vector<double> Affine(const ad::Tensor& w, const ad::Tensor& b,
                           std::span<const double> x) {
  const std::size_t n = w.dim(1);
  std::vector<double> out(n, 0.0);
  ad::kernels::AccumulateVecMat(x, w.data(), n, out.data());
  for (std::size_t j = 0; j < n; ++j) out[j] = out[j] + b[j];
  return out;
}

std::size_t ArgMax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace gwrl::models
