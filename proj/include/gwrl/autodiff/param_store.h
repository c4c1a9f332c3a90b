#ifndef GWRL_AUTODIFF_PARAM_STORE_H_
#define GWRL_AUTODIFF_PARAM_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gwrl/autodiff/tensor.h"

namespace gwrl::ad {

/// Named, shape-frozen parameters. Names are dotted paths such as
/// "qgen.lstm.W_x". Iteration order is insertion order, which is what the
/// checkpoint writer and gradient reductions follow.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  /// Registers a parameter initialised uniformly in [-a, a] with
  /// a = 1/sqrt(fan_in). The stream is derived from the store seed and the
  /// name, so adding parameters never perturbs the others.
  Tensor& Add(const std::string& name, Shape shape, std::size_t fan_in);
  /// Same stream, explicit bound.
  Tensor& AddUniform(const std::string& name, Shape shape, double bound);
  /// Registers a parameter with explicit contents.
  Tensor& Add(const std::string& name, Tensor value);

  bool Contains(std::string_view name) const;
  std::size_t IndexOf(std::string_view name) const;
  const Tensor& Get(std::string_view name) const;
  /// Replaces a value; the shape must match the registered one.
  void Set(std::string_view name, const Tensor& value);

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].name; }
  const Tensor& value(std::size_t i) const { return entries_[i].value; }
  Tensor& mutable_value(std::size_t i) { return entries_[i].value; }
  std::uint64_t seed() const { return seed_; }
  std::size_t NumScalars() const;

  void FillAll(double value);

  bool operator==(const ParamStore& other) const;

 private:
  struct Entry {
    std::string name;
    Tensor value;
  };
  std::uint64_t seed_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Gradient buffers keyed by parameter name.
class Gradients {
 public:
  Gradients() = default;
  /// Zero buffers for every parameter of the store.
  static Gradients ZerosLike(const ParamStore& store);

  bool Contains(std::string_view name) const;
  const Tensor& Get(std::string_view name) const;
  /// Adds `grad` into the buffer for `name`, creating it if needed.
  void Accumulate(const std::string& name, const Tensor& grad,
                  double scale = 1.0);
  void Add(const Gradients& other, double scale = 1.0);
  void Scale(double factor);
  void Clear() { grads_.clear(); }
  double SquaredNorm() const;
  /// Concatenation of all buffers in name order.
  std::vector<double> Flatten() const;

  const std::map<std::string, Tensor, std::less<>>& entries() const {
    return grads_;
  }

 private:
  std::map<std::string, Tensor, std::less<>> grads_;
};

enum class StepDirection { kDescent, kAscent };

/// params[name] += sign * lr * grads[name] for every parameter of `params`.
/// Throws if a parameter has no gradient buffer; the message lists every
/// missing name. With a positive `clip_norm` the whole gradient is rescaled
/// to at most that L2 norm first.
void SgdStep(ParamStore& params, const Gradients& grads, double lr,
             StepDirection direction, double clip_norm = 0.0);

/// 64-bit FNV-1a; stable across platforms, used for seed derivation.
std::uint64_t HashName(std::string_view name);
/// splitmix64 mix of two values.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

}  // namespace gwrl::ad

#endif  // GWRL_AUTODIFF_PARAM_STORE_H_
