#ifndef GWRL_AUTODIFF_TAPE_H_
#define GWRL_AUTODIFF_TAPE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tensor.h"

namespace gwrl::ad {

class Tape;

/// Support mask over a vocabulary-sized axis: nonzero means allowed.
using Mask = std::vector<std::uint8_t>;
using MaskView = std::span<const std::uint8_t>;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::int32_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  /// Value of a one-element node.
  double item() const;

 private:
  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
};

enum class OpKind : std::uint8_t {
  kConstant,
  kParam,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kConcat,
  kSlice,
  kTanh,
  kSigmoid,
  kLog,
  kExp,
  kEmbedding,
  kSum,
  kDot,
  kSoftmax,
  kLogSoftmax,
  kPick,
  kCrossEntropy,
  kLstmCell,
};

/// Append-only record of a computation. Nodes only reference earlier nodes,
/// so a reverse sweep is a valid topological order.
///
/// Gradients of leaves (constants and parameters) persist across Backward
/// calls and accumulate; interior gradients are scratch. A tape is used by
/// one thread at a time.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  /// Leaf for a parameter. Repeated requests for the same parameter return
  /// the same node.
  Var Param(const ParamStore& store, std::string_view name);
  Var Param(const ParamStore& store, std::size_t index);

  /// Reverse sweep from a one-element `loss`, seeding d(loss)/d(loss) = seed.
  void Backward(Var loss, double seed = 1.0);

  /// Accumulated gradient of a leaf, or nullptr if none has reached it.
  const Tensor* Grad(Var leaf) const;
  /// Adds the gradient of every parameter leaf of `store` seen on this tape
  /// into `out`. Parameters the loss never reached get zero buffers.
  void AccumulateParamGrads(const ParamStore& store, Gradients& out) const;
  void ZeroGrad();

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::int32_t id) const { return nodes_[id].value; }
  OpKind op(std::int32_t id) const { return nodes_[id].op; }
  const std::vector<std::int32_t>& inputs(std::int32_t id) const {
    return nodes_[id].inputs;
  }
  /// Parameter path of a param leaf, "" otherwise.
  const std::string& label(std::int32_t id) const { return nodes_[id].label; }

  struct Node {
    OpKind op;
    std::vector<std::int32_t> inputs;
    Tensor value;
    std::vector<double> saved;
    std::vector<std::size_t> indices;
    double scalar = 0.0;
    std::string label;
  };
  Var Push(Node node);
  const Node& node(std::int32_t id) const { return nodes_[id]; }

 private:
  void BackwardNode(std::int32_t id, std::vector<std::vector<double>>& grads);

  std::vector<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::size_t>, std::int32_t> params_;
  std::map<std::int32_t, Tensor> leaf_grads_;
};

// Primitives. All of them record onto the tape of their first operand.

/// [k] x [k,n] -> [n], or [m,k] x [k,n] -> [m,n].
Var MatMul(Var a, Var b);
/// Elementwise, shapes equal; `b` may also be a row vector broadcast over the
/// rows of a matrix `a`.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
/// Concatenation of 1-D tensors.
Var Concat(std::span<const Var> parts);
Var Concat(std::initializer_list<Var> parts);
/// Elements [offset, offset + length) of a 1-D tensor.
Var Slice(Var a, std::size_t offset, std::size_t length);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var Log(Var a);
Var Exp(Var a);
/// Row `row` of a [rows, cols] table, as a [cols] vector.
Var Embedding(Var table, std::size_t row);
Var Sum(Var a);
Var Dot(Var a, Var b);
/// Softmax over a 1-D tensor. Entries with mask[i] == 0 get probability
/// exactly zero; an empty mask means all entries are allowed.
Var Softmax(Var logits, MaskView mask = {});
Var LogSoftmax(Var logits, MaskView mask = {});
/// Element `index` of a 1-D tensor as a scalar.
Var Pick(Var a, std::size_t index);
/// -log softmax(logits)[target], optionally restricted to `mask`.
Var CrossEntropy(Var logits, std::size_t target, MaskView mask = {});

struct LstmOutput {
  Var h;
  Var c;
};
/// One LSTM step with gate order (input, forget, candidate, output):
///   z = x W_x + h W_h + b,  i,f,o = sigmoid,  g = tanh,
///   c' = f*c + i*g,  h' = o * tanh(c').
/// W_x is [in, 4H], W_h is [H, 4H], b is [4H].
LstmOutput LstmCell(Var x, Var h, Var c, Var w_x, Var w_h, Var b);

/// Numerically stable softmax of a plain vector. Throws on non-finite input
/// ("non-finite logits").
std::vector<double> Softmax(std::span<const double> logits,
                            MaskView mask = {});
std::vector<double> LogSoftmax(std::span<const double> logits,
                               MaskView mask = {});

}  // namespace gwrl::ad

#endif  // GWRL_AUTODIFF_TAPE_H_
