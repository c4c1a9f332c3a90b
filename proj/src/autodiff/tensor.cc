#include "gwrl/autodiff/tensor.h"

#include <sstream>
#include <utility>

namespace gwrl::ad {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

namespace {

void CheckShape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw ShapeError("tensor extents must be >= 1, got " +
                       ShapeToString(shape));
    }
  }
}

}  // namespace

Tensor::Tensor() : shape_{1}, values_(1, 0.0) {}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  CheckShape(shape_);
  values_.assign(NumElements(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  CheckShape(shape_);
  if (values_.size() != NumElements(shape_)) {
    throw ShapeError("tensor of shape " + ShapeToString(shape_) + " needs " +
                     std::to_string(NumElements(shape_)) + " values, got " +
                     std::to_string(values_.size()));
  }
}

Tensor Tensor::Vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

void Tensor::Fill(double value) {
  for (double& v : values_) v = value;
}

void Tensor::AddInPlace(const Tensor& other, double scale) {
  if (other.shape_ != shape_) {
    throw ShapeError("cannot add " + ShapeToString(other.shape_) + " into " +
                     ShapeToString(shape_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += scale * other.values_[i];
  }
}

}  // namespace gwrl::ad
