#ifndef GWRL_MODELS_LAYERS_H_
#define GWRL_MODELS_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tape.h"

namespace gwrl::models {

struct ModelSizes {
  int word_dim = 16;
  int category_dim = 8;
  int hidden = 64;
  int feature_dim = 32;
  int mlp_hidden = 64;
  int baseline_hidden = 32;

  std::vector<std::string> Validate() const;
};

/// Embedding tables start wider than fan-in scaling would give them; with
/// plain SGD the small default leaves the recurrent models stuck near chance
/// for several epochs.
inline constexpr double kEmbeddingInitBound = 2.0;

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState Zeros(std::size_t hidden) {
    return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)};
  }
  bool operator==(const LstmState&) const = default;
};

/// Single-layer LSTM whose weights live in a ParamStore under
/// `<prefix>.W_x`, `<prefix>.W_h`, `<prefix>.b`.
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(ad::ParamStore& store, const std::string& prefix, std::size_t input,
            std::size_t hidden);

  ad::LstmOutput Step(ad::Tape& tape, const ad::ParamStore& store, ad::Var x,
                      ad::Var h, ad::Var c) const;
  /// Tape-free step; bit-identical to the tape version.
  void Step(const ad::ParamStore& store, std::span<const double> x,
            LstmState& state) const;

  std::size_t input_dim() const { return input_; }
  std::size_t hidden_dim() const { return hidden_; }

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
  std::size_t w_x_ = 0, w_h_ = 0, b_ = 0;
};

/// y = W_2 tanh(W_1 x + b_1) + b_2, weights under `<prefix>.W1` etc.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ad::ParamStore& store, const std::string& prefix, std::size_t input,
      std::size_t hidden, std::size_t output);

  ad::Var Forward(ad::Tape& tape, const ad::ParamStore& store, ad::Var x) const;
  std::vector<double> Forward(const ad::ParamStore& store,
                              std::span<const double> x) const;

  std::size_t input_dim() const { return input_; }
  std::size_t output_dim() const { return output_; }

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
  std::size_t output_ = 0;
  std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0;
};

/// out = b + x W, accumulated in the same order as the tape's MatMul + Add.
std::vector<double> Affine(const ad::Tensor& w, const ad::Tensor& b,
                           std::span<const double> x);

/// Lowest index among the maxima.
std::size_t ArgMax(std::span<const double> values);

}  // namespace gwrl::models

#endif  // GWRL_MODELS_LAYERS_H_
