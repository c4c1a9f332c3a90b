#include "gwrl/autodiff/param_store.h"

#include <cmath>
#include <stdexcept>

#include "gwrl/util/rng.h"

namespace gwrl::ad {

std::uint64_t HashName(std::string_view name) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Tensor& ParamStore::Add(const std::string& name, Shape shape,
                        std::size_t fan_in) {
  return AddUniform(name, std::move(shape),
                    1.0 / std::sqrt(static_cast<double>(fan_in ? fan_in : 1)));
}

Tensor& ParamStore::AddUniform(const std::string& name, Shape shape, double bound) {
  Tensor value(std::move(shape));
  Rng rng(MixSeed(seed_, HashName(name)));
  for (double& v : value.values()) v = rng.Uniform(-bound, bound);
  return Add(name, std::move(value));
}

Tensor& ParamStore::Add(const std::string& name, Tensor value) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  index_.emplace(name, entries_.size());
  entries_.push_back({name, std::move(value)});
  return entries_.back().value;
}

bool ParamStore::Contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

std::size_t ParamStore::IndexOf(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("unknown parameter: " + std::string(name));
  }
  return it->second;
}

const Tensor& ParamStore::Get(std::string_view name) const {
  return entries_[IndexOf(name)].value;
}

void ParamStore::Set(std::string_view name, const Tensor& value) {
  Tensor& slot = entries_[IndexOf(name)].value;
  if (slot.shape() != value.shape()) {
    throw ShapeError("parameter " + std::string(name) + " has shape " +
                     ShapeToString(slot.shape()) + ", cannot assign " +
                     ShapeToString(value.shape()));
  }
  slot = value;
}

std::size_t ParamStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

void ParamStore::FillAll(double value) {
  for (auto& e : entries_) e.value.Fill(value);
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (!(entries_[i].value == other.entries_[i].value)) return false;
  }
  return true;
}

Gradients Gradients::ZerosLike(const ParamStore& store) {
  Gradients g;
  for (std::size_t i = 0; i < store.size(); ++i) {
    g.grads_.emplace(store.name(i), Tensor(store.value(i).shape()));
  }
  return g;
}

bool Gradients::Contains(std::string_view name) const {
  return grads_.find(name) != grads_.end();
}

const Tensor& Gradients::Get(std::string_view name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    throw std::out_of_range("no gradient for parameter: " + std::string(name));
  }
  return it->second;
}

void Gradients::Accumulate(const std::string& name, const Tensor& grad,
                           double scale) {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    it = grads_.emplace(name, Tensor(grad.shape())).first;
  }
  it->second.AddInPlace(grad, scale);
}

void Gradients::Add(const Gradients& other, double scale) {
  for (const auto& [name, grad] : other.grads_) Accumulate(name, grad, scale);
}

void Gradients::Scale(double factor) {
  for (auto& [name, grad] : grads_) {
    for (double& v : grad.values()) v *= factor;
  }
}

double Gradients::SquaredNorm() const {
  double total = 0.0;
  for (const auto& [name, grad] : grads_) {
    for (double v : grad.values()) total += v * v;
  }
  return total;
}

std::vector<double> Gradients::Flatten() const {
  std::vector<double> flat;
  for (const auto& [name, grad] : grads_) {
    flat.insert(flat.end(), grad.values().begin(), grad.values().end());
  }
  return flat;
}

void SgdStep(ParamStore& params, const Gradients& grads, double lr,
             StepDirection direction, double clip_norm) {
  std::string missing;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads.Contains(params.name(i))) {
      missing += (missing.empty() ? "" : ", ") + params.name(i);
    }
  }
  if (!missing.empty()) {
    throw std::invalid_argument("missing gradient for parameters: " + missing);
  }
  double scale = direction == StepDirection::kAscent ? lr : -lr;
  if (clip_norm > 0.0) {
    const double norm = std::sqrt(grads.SquaredNorm());
    if (norm > clip_norm) scale *= clip_norm / norm;
  }
  if (scale == 0.0) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    params.mutable_value(i).AddInPlace(grads.Get(params.name(i)), scale);
  }
}

}  // namespace gwrl::ad
