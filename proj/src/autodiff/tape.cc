#include "gwrl/autodiff/tape.h"

#include "gwrl/autodiff/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwrl::ad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Tape& TapeOf(Var v) {
  if (!v.valid()) throw std::invalid_argument("operand is not on a tape");
  return *v.tape();
}

void SameTape(Var a, Var b) {
  if (a.tape() != b.tape()) {
    throw std::invalid_argument("operands recorded on different tapes");
  }
}

std::string Describe(const Tape& tape, Var v) {
  const std::string& label = tape.label(v.id());
  return label.empty() ? "node " + std::to_string(v.id()) : label;
}

bool Allowed(MaskView mask, std::size_t i) { return mask.empty() || mask[i]; }

void CheckMask(MaskView mask, std::size_t n) {
  if (!mask.empty() && mask.size() != n) {
    throw ShapeError("mask length " + std::to_string(mask.size()) +
                     " does not match logits length " + std::to_string(n));
  }
}

// Fills `probs` and returns log-sum-exp over the allowed entries.
double StableSoftmax(std::span<const double> x, MaskView mask,
                     std::vector<double>& probs) {
  CheckMask(mask, x.size());
  double max_val = kNegInf;
  bool any = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw std::domain_error("non-finite logits");
    if (Allowed(mask, i)) {
      max_val = std::max(max_val, x[i]);
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("softmax mask allows no entries");
  probs.assign(x.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!Allowed(mask, i)) continue;
    probs[i] = std::exp(x[i] - max_val);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return max_val + std::log(total);
}

inline double SigmoidScalar(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double>& GradBuffer(std::vector<std::vector<double>>& grads,
                                std::int32_t id, std::size_t n) {
  auto& g = grads[id];
  if (g.empty()) g.assign(n, 0.0);
  return g;
}

Var Unary(OpKind op, Var a, Tensor value, std::vector<double> saved = {}) {
  Tape::Node node{op, {a.id()}, std::move(value), std::move(saved), {}, 0.0, {}};
  return TapeOf(a).Push(std::move(node));
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const Tensor& v = value();
  if (v.size() != 1) {
    throw ShapeError("item() on tensor of shape " + ShapeToString(v.shape()));
  }
  return v[0];
}

Var Tape::Push(Node node) {
  for (std::int32_t in : node.inputs) {
    if (in < 0 || in >= static_cast<std::int32_t>(nodes_.size())) {
      throw std::logic_error("tape input references a later node");
    }
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1));
}

Var Tape::Constant(Tensor value) {
  return Push(Node{OpKind::kConstant, {}, std::move(value), {}, {}, 0.0, {}});
}

Var Tape::Param(const ParamStore& store, std::string_view name) {
  return Param(store, store.IndexOf(name));
}

Var Tape::Param(const ParamStore& store, std::size_t index) {
  auto key = std::make_pair(&store, index);
  auto it = params_.find(key);
  if (it != params_.end()) return Var(this, it->second);
  Var v = Push(Node{OpKind::kParam, {}, store.value(index), {}, {index}, 0.0,
                    store.name(index)});
  params_.emplace(key, v.id());
  return v;
}

void Tape::Backward(Var loss, double seed) {
  if (loss.tape() != this) throw std::invalid_argument("loss is on another tape");
  if (value(loss.id()).size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " +
                     ShapeToString(value(loss.id()).shape()));
  }
  std::vector<std::vector<double>> grads(loss.id() + 1);
  grads[loss.id()].assign(1, seed);
  for (std::int32_t id = loss.id(); id >= 0; --id) {
    if (grads[id].empty()) continue;
    const Node& n = nodes_[id];
    if (n.op == OpKind::kConstant || n.op == OpKind::kParam) {
      auto it = leaf_grads_.find(id);
      if (it == leaf_grads_.end()) {
        leaf_grads_.emplace(id, Tensor(n.value.shape(), std::move(grads[id])));
      } else {
        double* dst = it->second.data();
        for (std::size_t i = 0; i < grads[id].size(); ++i) dst[i] += grads[id][i];
      }
      continue;
    }
    BackwardNode(id, grads);
    grads[id].clear();
    grads[id].shrink_to_fit();
  }
  // Leaves that were recorded but unreachable still get explicit zeros.
  for (const auto& [key, id] : params_) {
    if (id <= loss.id() && !leaf_grads_.count(id)) {
      leaf_grads_.emplace(id, Tensor(nodes_[id].value.shape()));
    }
  }
}

const Tensor* Tape::Grad(Var leaf) const {
  auto it = leaf_grads_.find(leaf.id());
  return it == leaf_grads_.end() ? nullptr : &it->second;
}

void Tape::AccumulateParamGrads(const ParamStore& store, Gradients& out) const {
  for (const auto& [key, id] : params_) {
    if (key.first != &store) continue;
    auto it = leaf_grads_.find(id);
    if (it != leaf_grads_.end()) {
      out.Accumulate(store.name(key.second), it->second);
    } else {
      out.Accumulate(store.name(key.second), Tensor(nodes_[id].value.shape()));
    }
  }
}

void Tape::ZeroGrad() { leaf_grads_.clear(); }

void Tape::BackwardNode(std::int32_t id, std::vector<std::vector<double>>& grads) {
  const Node& n = nodes_[id];
  const std::vector<double>& g = grads[id];
  auto in_value = [&](std::size_t k) -> const Tensor& {
    return nodes_[n.inputs[k]].value;
  };
  auto in_grad = [&](std::size_t k) -> std::vector<double>& {
    return GradBuffer(grads, n.inputs[k], in_value(k).size());
  };

  switch (n.op) {
    case OpKind::kConstant:
    case OpKind::kParam:
      break;
    case OpKind::kMatMul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      const std::size_t k = b.dim(0), cols = b.dim(1);
      const std::size_t rows = a.size() / k;
      auto& da = in_grad(0);
      auto& db = in_grad(1);
      const double* bp = b.data();
      const double* ap = a.data();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* gi = g.data() + i * cols;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = bp + p * cols;
          double acc = 0.0;
          for (std::size_t j = 0; j < cols; ++j) acc += gi[j] * brow[j];
          da[i * k + p] += acc;
          const double aip = ap[i * k + p];
          if (aip != 0.0) {
            double* dbrow = db.data() + p * cols;
            for (std::size_t j = 0; j < cols; ++j) dbrow[j] += aip * gi[j];
          }
        }
      }
      break;
    }
    case OpKind::kAdd:
    case OpKind::kSub: {
      const double sign = n.op == OpKind::kAdd ? 1.0 : -1.0;
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
      auto& db = in_grad(1);
      const std::size_t nb = db.size();
      for (std::size_t i = 0; i < g.size(); ++i) db[i % nb] += sign * g[i];
      break;
    }
    case OpKind::kMul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * b[i];
      auto& db = in_grad(1);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * a[i];
      break;
    }
    case OpKind::kScale: {
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += n.scalar * g[i];
      break;
    }
    case OpKind::kConcat: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        auto& dk = in_grad(k);
        for (std::size_t i = 0; i < dk.size(); ++i) dk[i] += g[offset + i];
        offset += dk.size();
      }
      break;
    }
    case OpKind::kSlice: {
      auto& da = in_grad(0);
      const std::size_t offset = n.indices[0];
      for (std::size_t i = 0; i < g.size(); ++i) da[offset + i] += g[i];
      break;
    }
    case OpKind::kTanh: {
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = n.value[i];
        da[i] += g[i] * (1.0 - y * y);
      }
      break;
    }
    case OpKind::kSigmoid: {
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = n.value[i];
        da[i] += g[i] * y * (1.0 - y);
      }
      break;
    }
    case OpKind::kLog: {
      const Tensor& a = in_value(0);
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] / a[i];
      break;
    }
    case OpKind::kExp: {
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.value[i];
      break;
    }
    case OpKind::kEmbedding: {
      auto& dt = in_grad(0);
      const std::size_t cols = g.size();
      double* row = dt.data() + n.indices[0] * cols;
      for (std::size_t j = 0; j < cols; ++j) row[j] += g[j];
      break;
    }
    case OpKind::kSum: {
      auto& da = in_grad(0);
      for (double& d : da) d += g[0];
      break;
    }
    case OpKind::kDot: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < a.size(); ++i) da[i] += g[0] * b[i];
      auto& db = in_grad(1);
      for (std::size_t i = 0; i < a.size(); ++i) db[i] += g[0] * a[i];
      break;
    }
    case OpKind::kSoftmax: {
      auto& da = in_grad(0);
      double inner = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * n.value[i];
      for (std::size_t i = 0; i < g.size(); ++i) {
        da[i] += n.value[i] * (g[i] - inner);
      }
      break;
    }
    case OpKind::kLogSoftmax: {
      // saved = probabilities (zero where masked)
      auto& da = in_grad(0);
      double total = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::isfinite(n.value[i])) total += g[i];
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(n.value[i])) continue;
        da[i] += g[i] - n.saved[i] * total;
      }
      break;
    }
    case OpKind::kPick: {
      auto& da = in_grad(0);
      da[n.indices[0]] += g[0];
      break;
    }
    case OpKind::kCrossEntropy: {
      auto& da = in_grad(0);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[0] * n.saved[i];
      da[n.indices[0]] -= g[0];
      break;
    }
    case OpKind::kLstmCell: {
      // inputs: x, h, c, W_x, W_h, b. saved: i f g o (4H) then tanh(c') (H).
      const Tensor& x = in_value(0);
      const Tensor& h = in_value(1);
      const Tensor& c = in_value(2);
      const Tensor& wx = in_value(3);
      const Tensor& wh = in_value(4);
      const std::size_t hid = h.size();
      const std::size_t in = x.size();
      const std::size_t four = 4 * hid;
      const double* gate_i = n.saved.data();
      const double* gate_f = gate_i + hid;
      const double* gate_g = gate_f + hid;
      const double* gate_o = gate_g + hid;
      const double* tanh_c = gate_o + hid;
      std::vector<double> dz(four);
      auto& dc_prev = in_grad(2);
      for (std::size_t k = 0; k < hid; ++k) {
        const double dh = g[k];
        const double dc = g[hid + k] +
                          dh * gate_o[k] * (1.0 - tanh_c[k] * tanh_c[k]);
        const double d_o = dh * tanh_c[k];
        const double d_i = dc * gate_g[k];
        const double d_g = dc * gate_i[k];
        const double d_f = dc * c[k];
        dc_prev[k] += dc * gate_f[k];
        dz[k] = d_i * gate_i[k] * (1.0 - gate_i[k]);
        dz[hid + k] = d_f * gate_f[k] * (1.0 - gate_f[k]);
        dz[2 * hid + k] = d_g * (1.0 - gate_g[k] * gate_g[k]);
        dz[3 * hid + k] = d_o * gate_o[k] * (1.0 - gate_o[k]);
      }
      auto backprop_linear = [&](const Tensor& input, const Tensor& w,
                                 std::vector<double>& d_input,
                                 std::vector<double>& d_w, std::size_t rows) {
        const double* wp = w.data();
        for (std::size_t p = 0; p < rows; ++p) {
          const double* wrow = wp + p * four;
          double acc = 0.0;
          for (std::size_t j = 0; j < four; ++j) acc += dz[j] * wrow[j];
          d_input[p] += acc;
          const double ip = input[p];
          if (ip != 0.0) {
            double* dwrow = d_w.data() + p * four;
            for (std::size_t j = 0; j < four; ++j) dwrow[j] += ip * dz[j];
          }
        }
      };
      backprop_linear(x, wx, in_grad(0), in_grad(3), in);
      backprop_linear(h, wh, in_grad(1), in_grad(4), hid);
      auto& db = in_grad(5);
      for (std::size_t j = 0; j < four; ++j) db[j] += dz[j];
      break;
    }
  }
}

Var MatMul(Var a, Var b) {
  SameTape(a, b);
  Tape& t = TapeOf(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.rank() != 2 || av.rank() > 2 || av.shape().back() != bv.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + Describe(t, a) + " " +
                     ShapeToString(av.shape()) + " by " + Describe(t, b) + " " +
                     ShapeToString(bv.shape()));
  }
  const std::size_t k = bv.dim(0), cols = bv.dim(1);
  const std::size_t rows = av.rank() == 1 ? 1 : av.dim(0);
  Shape out_shape = av.rank() == 1 ? Shape{cols} : Shape{rows, cols};
  Tensor out(out_shape);
  double* op = out.data();
  const double* ap = av.data();
  const double* bp = bv.data();
  for (std::size_t i = 0; i < rows; ++i) {
    kernels::AccumulateVecMat(std::span<const double>(ap + i * k, k), bp, cols,
                              op + i * cols);
  }
  return t.Push({OpKind::kMatMul, {a.id(), b.id()}, std::move(out), {}, {}, 0.0, {}});
}

namespace {

Var Elementwise(OpKind op, Var a, Var b) {
  SameTape(a, b);
  Tape& t = TapeOf(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool broadcast = op != OpKind::kMul && av.rank() == 2 &&
                         bv.rank() == 1 && bv.size() == av.dim(1);
  if (av.shape() != bv.shape() && !broadcast) {
    throw ShapeError("elementwise op: shape mismatch between " +
                     Describe(t, a) + " " + ShapeToString(av.shape()) + " and " +
                     Describe(t, b) + " " + ShapeToString(bv.shape()));
  }
  Tensor out(av.shape());
  const std::size_t nb = bv.size();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i], y = bv[i % nb];
    out[i] = op == OpKind::kAdd ? x + y : op == OpKind::kSub ? x - y : x * y;
  }
  return t.Push({op, {a.id(), b.id()}, std::move(out), {}, {}, 0.0, {}});
}

}  // namespace

Var Add(Var a, Var b) { return Elementwise(OpKind::kAdd, a, b); }
Var Sub(Var a, Var b) { return Elementwise(OpKind::kSub, a, b); }
Var Mul(Var a, Var b) { return Elementwise(OpKind::kMul, a, b); }

Var Scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  Tape::Node node{OpKind::kScale, {a.id()}, std::move(out), {}, {}, factor, {}};
  return TapeOf(a).Push(std::move(node));
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Tape& t = TapeOf(parts[0]);
  std::vector<double> values;
  std::vector<std::int32_t> ids;
  for (const Var& p : parts) {
    SameTape(parts[0], p);
    if (p.value().rank() != 1) {
      throw ShapeError("concat expects 1-D tensors, got " + Describe(t, p) +
                       " " + ShapeToString(p.value().shape()));
    }
    values.insert(values.end(), p.value().values().begin(),
                  p.value().values().end());
    ids.push_back(p.id());
  }
  return t.Push({OpKind::kConcat, std::move(ids), Tensor::Vector(std::move(values)),
                 {}, {}, 0.0, {}});
}

Var Concat(std::initializer_list<Var> parts) {
  return Concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var Slice(Var a, std::size_t offset, std::size_t length) {
  const Tensor& av = a.value();
  if (av.rank() != 1 || length == 0 || offset + length > av.size()) {
    throw ShapeError("slice [" + std::to_string(offset) + ", +" +
                     std::to_string(length) + ") out of range for " +
                     ShapeToString(av.shape()));
  }
  std::vector<double> values(av.values().begin() + offset,
                             av.values().begin() + offset + length);
  Tape::Node node{OpKind::kSlice, {a.id()}, Tensor::Vector(std::move(values)),
                  {}, {offset, length}, 0.0, {}};
  return TapeOf(a).Push(std::move(node));
}

Var Tanh(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return Unary(OpKind::kTanh, a, std::move(out));
}

Var Sigmoid(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = SigmoidScalar(v);
  return Unary(OpKind::kSigmoid, a, std::move(out));
}

Var Log(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) {
    if (!(v > 0.0)) throw std::domain_error("log of non-positive value");
    v = std::log(v);
  }
  return Unary(OpKind::kLog, a, std::move(out));
}

Var Exp(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::exp(v);
  return Unary(OpKind::kExp, a, std::move(out));
}

Var Embedding(Var table, std::size_t row) {
  Tape& t = TapeOf(table);
  const Tensor& tv = table.value();
  if (tv.rank() != 2) {
    throw ShapeError("embedding table " + Describe(t, table) + " must be 2-D");
  }
  if (row >= tv.dim(0)) {
    throw std::out_of_range("embedding row " + std::to_string(row) +
                            " out of range for " + Describe(t, table) + " " +
                            ShapeToString(tv.shape()));
  }
  const std::size_t cols = tv.dim(1);
  std::vector<double> values(tv.data() + row * cols, tv.data() + (row + 1) * cols);
  return t.Push({OpKind::kEmbedding, {table.id()}, Tensor::Vector(std::move(values)),
                 {}, {row}, 0.0, {}});
}

Var Sum(Var a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return Unary(OpKind::kSum, a, Tensor::Scalar(total));
}

Var Dot(Var a, Var b) {
  SameTape(a, b);
  Tape& t = TapeOf(a);
  if (a.value().size() != b.value().size()) {
    throw ShapeError("dot: length mismatch between " + Describe(t, a) + " and " +
                     Describe(t, b));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) {
    total += a.value()[i] * b.value()[i];
  }
  return t.Push({OpKind::kDot, {a.id(), b.id()}, Tensor::Scalar(total), {}, {}, 0.0, {}});
}

std::vector<double> Softmax(std::span<const double> logits, MaskView mask) {
  std::vector<double> probs;
  StableSoftmax(logits, mask, probs);
  return probs;
}

std::vector<double> LogSoftmax(std::span<const double> logits, MaskView mask) {
  std::vector<double> probs;
  const double lse = StableSoftmax(logits, mask, probs);
  std::vector<double> out(logits.size(), kNegInf);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (Allowed(mask, i)) out[i] = logits[i] - lse;
  }
  return out;
}

Var Softmax(Var logits, MaskView mask) {
  if (logits.value().rank() != 1) throw ShapeError("softmax expects a 1-D tensor");
  return Unary(OpKind::kSoftmax, logits,
               Tensor::Vector(Softmax(logits.value().values(), mask)));
}

Var LogSoftmax(Var logits, MaskView mask) {
  if (logits.value().rank() != 1) {
    throw ShapeError("log-softmax expects a 1-D tensor");
  }
  std::vector<double> probs;
  const auto x = logits.value().values();
  const double lse = StableSoftmax(x, mask, probs);
  std::vector<double> out(x.size(), kNegInf);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (Allowed(mask, i)) out[i] = x[i] - lse;
  }
  return Unary(OpKind::kLogSoftmax, logits, Tensor::Vector(std::move(out)),
               std::move(probs));
}

Var Pick(Var a, std::size_t index) {
  if (index >= a.value().size()) {
    throw std::out_of_range("pick index " + std::to_string(index) +
                            " out of range");
  }
  Tape::Node node{OpKind::kPick, {a.id()}, Tensor::Scalar(a.value()[index]),
                  {}, {index}, 0.0, {}};
  return TapeOf(a).Push(std::move(node));
}

Var CrossEntropy(Var logits, std::size_t target, MaskView mask) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 1) throw ShapeError("cross-entropy expects 1-D logits");
  if (target >= lv.size()) {
    throw std::out_of_range("cross-entropy target " + std::to_string(target) +
                            " out of range for " + std::to_string(lv.size()) +
                            " classes");
  }
  if (!Allowed(mask, target)) {
    throw std::invalid_argument("cross-entropy target " + std::to_string(target) +
                                " is masked out");
  }
  std::vector<double> probs;
  const double lse = StableSoftmax(lv.values(), mask, probs);
  Tape::Node node{OpKind::kCrossEntropy, {logits.id()},
                  Tensor::Scalar(lse - lv[target]), std::move(probs), {target},
                  0.0, {}};
  return TapeOf(logits).Push(std::move(node));
}

LstmOutput LstmCell(Var x, Var h, Var c, Var w_x, Var w_h, Var b) {
  Tape& t = TapeOf(x);
  for (Var v : {h, c, w_x, w_h, b}) SameTape(x, v);
  const Tensor& xv = x.value();
  const Tensor& hv = h.value();
  const Tensor& cv = c.value();
  const Tensor& wxv = w_x.value();
  const Tensor& whv = w_h.value();
  const Tensor& bv = b.value();
  const std::size_t hid = hv.size();
  const std::size_t in = xv.size();
  const std::size_t four = 4 * hid;
  if (cv.size() != hid) {
    throw ShapeError("lstm: cell state has " + std::to_string(cv.size()) +
                     " units, hidden state has " + std::to_string(hid));
  }
  if (wxv.rank() != 2 || wxv.dim(0) != in || wxv.dim(1) != four) {
    throw ShapeError("lstm: " + Describe(t, w_x) + " has shape " +
                     ShapeToString(wxv.shape()) + ", expected [" +
                     std::to_string(in) + "x" + std::to_string(four) + "]");
  }
  if (whv.rank() != 2 || whv.dim(0) != hid || whv.dim(1) != four) {
    throw ShapeError("lstm: " + Describe(t, w_h) + " has shape " +
                     ShapeToString(whv.shape()) + ", expected [" +
                     std::to_string(hid) + "x" + std::to_string(four) + "]");
  }
  if (bv.size() != four) {
    throw ShapeError("lstm: " + Describe(t, b) + " has shape " +
                     ShapeToString(bv.shape()) + ", expected [" +
                     std::to_string(four) + "]");
  }
  std::vector<double> saved(5 * hid);
  std::vector<double> out(2 * hid);
  kernels::LstmForward(xv.values(), hv.values(), cv.values(), wxv, whv, bv,
                       out.data(), out.data() + hid, saved.data());
  Var both = t.Push({OpKind::kLstmCell,
                     {x.id(), h.id(), c.id(), w_x.id(), w_h.id(), b.id()},
                     Tensor::Vector(std::move(out)), std::move(saved), {}, 0.0, {}});
  return {Slice(both, 0, hid), Slice(both, hid, hid)};
}

}  // namespace gwrl::ad
